// Copyright 2026 The FanStore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "dataset_fixture.h"
#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/launcher.h"

namespace fanstore {
namespace {

using testing::TempDir;

Bytes whole(const ReadHandle& h) {
  ByteView v = h.read_at(0, h.size());
  return Bytes(v.begin(), v.end());
}

class DataPlaneTest : public ::testing::TestWithParam<bool> {
 protected:
  void SetUp() override {
    std::optional<CodecId> codec;
    if (GetParam()) codec = CodecId::kLzss;
    ds_ = testing::make_packed_dataset(dir_.path(), 80, 30000, 8, codec, 9);
    cluster_ = std::make_unique<InProcessCluster>(
        make_local_config(3, dir_ / "nodes", ds_.packed), ds_.manifest_path());
  }
  void TearDown() override { cluster_.reset(); }

  TempDir dir_;
  testing::PackedDataset ds_;
  std::unique_ptr<InProcessCluster> cluster_;
};

TEST_P(DataPlaneTest, EveryNodeReadsEveryFile) {
  for (std::size_t i = 0; i < cluster_->size(); ++i) {
    DataPlane& dp = cluster_->node(i).data();
    for (const auto& [path, content] : ds_.files) {
      auto h = dp.open_read(path);
      ASSERT_EQ(whole(h), content) << path << " on node " << i;
      dp.close_read(h);
    }
    EXPECT_EQ(dp.cache().entry_count(), 0u);
  }
}

TEST_P(DataPlaneTest, SequentialReadsAdvanceCursor) {
  const auto& [path, content] = *ds_.files.rbegin();
  DataPlane& dp = cluster_->node(0).data();
  auto h = dp.open_read(path);
  Bytes got;
  while (true) {
    ByteView v = dp.read(h, 777);
    if (v.empty()) break;
    got.insert(got.end(), v.begin(), v.end());
  }
  EXPECT_EQ(got, content);
  EXPECT_EQ(h.cursor(), content.size());
  dp.close_read(h);
}

TEST_P(DataPlaneTest, ConcurrentOpensShareOneCacheEntry) {
  const std::string path = ds_.files.begin()->first;
  DataPlane& dp = cluster_->node(1).data();
  auto a = dp.open_read(path);
  auto b = dp.open_read(path);
  EXPECT_EQ(dp.cache().refcount(path), 2u);
  dp.close_read(a);
  EXPECT_TRUE(dp.cache().contains(path));
  dp.close_read(b);
  EXPECT_FALSE(dp.cache().contains(path));
  dp.close_read(b);
  EXPECT_EQ(dp.stats().double_closes.load(), 1u);
  EXPECT_THROW(b.read(1), Error);
}

TEST_P(DataPlaneTest, DestroyingOpenHandleReleases) {
  const std::string path = ds_.files.begin()->first;
  DataPlane& dp = cluster_->node(2).data();
  { auto h = dp.open_read(path); }
  EXPECT_FALSE(dp.cache().contains(path));
}

TEST_P(DataPlaneTest, ErrorsMirrorPosix) {
  DataPlane& dp = cluster_->node(0).data();
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kIo;
  };
  EXPECT_EQ(code_of([&] { dp.open_read("train"); }), Errc::kIsDirectory);
  EXPECT_EQ(code_of([&] { dp.open_read("no/such"); }), Errc::kNotFound);
  EXPECT_EQ(code_of([&] { dp.open_write(ds_.files.begin()->first); }),
            Errc::kAlreadyExists);
  EXPECT_EQ(code_of([&] { dp.open_write("train"); }), Errc::kAlreadyExists);
}

TEST_P(DataPlaneTest, OutputsAreVisibleAfterCloseAndReadableEverywhere) {
  Node& writer = cluster_->node(0);
  Bytes content(12345);
  for (std::size_t i = 0; i < content.size(); ++i) content[i] = i * 7;
  auto w = writer.data().open_write("ckpt/epoch_0");
  writer.data().write(w, ByteView(content).first(5000));
  writer.data().write(w, ByteView(content).subspan(5000));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_THROW(cluster_->node(i).metadata().stat("ckpt/epoch_0"), Error);
  }
  writer.data().close_write(w);
  EXPECT_THROW(writer.data().close_write(w), Error);
  for (std::size_t i = 0; i < 3; ++i) {
    Node& n = cluster_->node(i);
    EXPECT_EQ(n.metadata().stat("ckpt/epoch_0").size_bytes, content.size());
    auto h = n.data().open_read("ckpt/epoch_0");
    EXPECT_EQ(whole(h), content);
    n.data().close_read(h);
  }
  try {
    cluster_->node(2).data().open_write("ckpt/epoch_0");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kAlreadyExists);
  }
}

TEST_P(DataPlaneTest, RacingWritersCommitOnce) {
  std::atomic<int> won{0}, lost{0};
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < 3; ++i) {
    threads.emplace_back([&, i] {
      DataPlane& dp = cluster_->node(i).data();
      try {
        auto w = dp.open_write("race/out");
        dp.write(w, as_bytes("node" + std::to_string(i)));
        dp.close_write(w);
        ++won;
      } catch (const Error& e) {
        if (e.code() == Errc::kAlreadyExists) ++lost;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(won.load(), 1);
  EXPECT_EQ(lost.load(), 2);
  // Losers left nothing behind.
  std::size_t holders = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    holders += cluster_->node(i).store().has_output("race/out") ? 1 : 0;
  }
  EXPECT_EQ(holders, 1u);
}

TEST_P(DataPlaneTest, FetchIsOneRequestAndOneResponseFrame) {
  Node& reader = cluster_->node(0);
  for (const auto& [path, content] : ds_.files) {
    const FileRecord* rec = reader.index().find_file(path);
    if (rec->location.owned_by(reader.id())) continue;
    NodeId owner = rec->location.owner_nodes.front();
    const auto& server = cluster_->node(owner).server().counters();
    const auto& client = reader.peers().counters();
    auto s_in = server.frames_received.load(), s_out = server.frames_sent.load();
    auto c_out = client.frames_sent.load(), c_in = client.frames_received.load();
    auto c_bytes = client.bytes_received.load();
    auto h = reader.data().open_read(path);
    reader.data().close_read(h);
    // The server bumps its counters after the bytes are on the wire, which
    // can be observed slightly after the client has the response.
    auto settled = [&] {
      auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
      while (server.frames_sent.load() - s_out < 1 &&
             std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    };
    settled();
    EXPECT_EQ(server.frames_received.load() - s_in, 1u);
    EXPECT_EQ(server.frames_sent.load() - s_out, 1u);
    EXPECT_EQ(client.frames_sent.load() - c_out, 1u);
    EXPECT_EQ(client.frames_received.load() - c_in, 1u);
    EXPECT_EQ(client.bytes_received.load() - c_bytes,
              rec->location.stored_size + wire::kFrameOverhead + 152);
  }
}

INSTANTIATE_TEST_SUITE_P(Codecs, DataPlaneTest, ::testing::Bool(),
                         [](const auto& info) {
                           return info.param ? "Lzss" : "Identity";
                         });

}  // namespace
}  // namespace fanstore
