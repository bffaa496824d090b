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
#include <stdlib.h>
#include <sys/stat.h>

#include <set>

#include "dataset_fixture.h"
#include "fanstore/client.h"
#include "fanstore/error.h"
#include "fanstore/launcher.h"

namespace fanstore {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::kIo;
}

TEST(MountMapTest, Resolve) {
  MountMap m("/fanstore/u1/");
  EXPECT_EQ(m.resolve("/fanstore/u1/train/cat/1.jpg"), "train/cat/1.jpg");
  EXPECT_EQ(m.resolve("/fanstore/u1"), "");
  EXPECT_EQ(m.resolve("/fanstore/u1/"), "");
  EXPECT_EQ(m.resolve("/fanstore/u1//a//b"), "a/b");
  EXPECT_EQ(m.resolve("/etc/hosts"), std::nullopt);
  EXPECT_EQ(m.resolve("/fanstore/u10/x"), std::nullopt);
  EXPECT_EQ(m.resolve("relative/path"), std::nullopt);
  EXPECT_EQ(m.to_mount("a/b"), "/fanstore/u1/a/b");
  EXPECT_EQ(m.to_mount(""), "/fanstore/u1");
  EXPECT_THROW(MountMap("no-slash"), Error);
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = ::getenv(name)) old_ = old;
    if (value) {
      ::setenv(name, value, 1);
    } else {
      ::unsetenv(name);
    }
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(ClientSettingsTest, Precedence) {
  {
    ScopedEnv a("FANSTORE_MOUNT", nullptr), b("FANSTORE_NODE", nullptr),
        c("FANSTORE_CONFIG", nullptr);
    ClientSettings s = ClientSettings{}.resolved();
    EXPECT_EQ(s.mount, ClientSettings::kDefaultMount);
    EXPECT_EQ(s.node, 0u);
    EXPECT_FALSE(s.config.has_value());
  }
  {
    ScopedEnv a("FANSTORE_MOUNT", "/env/mount"), b("FANSTORE_NODE", "3"),
        c("FANSTORE_CONFIG", "/env/cluster.json");
    ClientSettings s = ClientSettings{}.resolved();
    EXPECT_EQ(s.mount, "/env/mount");
    EXPECT_EQ(s.node, 3u);
    EXPECT_EQ(s.config, std::filesystem::path("/env/cluster.json"));

    ClientSettings explicit_args;
    explicit_args.mount = "/arg";
    explicit_args.node = 1;
    ClientSettings r = explicit_args.resolved();
    EXPECT_EQ(r.mount, "/arg");
    EXPECT_EQ(r.node, 1u);
    EXPECT_EQ(r.config, std::filesystem::path("/env/cluster.json"));
  }
  {
    ScopedEnv b("FANSTORE_NODE", "node-two");
    EXPECT_THROW(ClientSettings{}.resolved(), Error);
  }
}

class FileSystemTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = testing::make_packed_dataset(dir_.path(), 30, 5000, 4, CodecId::kLzss, 3);
    cluster_ = std::make_unique<InProcessCluster>(
        make_local_config(2, dir_ / "nodes", ds_.packed), ds_.manifest_path());
    fs0_ = std::make_unique<FileSystem>(cluster_->node(0), "/fanstore/u1");
    fs1_ = std::make_unique<FileSystem>(cluster_->node(1), "/fanstore/u1");
  }
  void TearDown() override {
    fs0_.reset();
    fs1_.reset();
    cluster_.reset();
  }

  TempDir dir_;
  testing::PackedDataset ds_;
  std::unique_ptr<InProcessCluster> cluster_;
  std::unique_ptr<FileSystem> fs0_, fs1_;
};

TEST_F(FileSystemTest, ManagedRoundTrip) {
  std::set<int> fds;
  for (const auto& [path, content] : ds_.files) {
    int fd = fs1_->open("/fanstore/u1/" + path, OpenMode::kRead);
    EXPECT_GE(fd, FileSystem::kFirstDescriptor);
    EXPECT_TRUE(fds.insert(fd).second);
    Bytes got;
    while (true) {
      Bytes chunk = fs1_->read(fd, 1000);
      if (chunk.empty()) break;
      append(got, chunk);
    }
    EXPECT_EQ(got, content) << path;
    if (content.size() > 10) {
      EXPECT_EQ(fs1_->pread(fd, 5, 5), Bytes(content.begin() + 5, content.begin() + 10));
    }
    fs1_->close(fd);
    EXPECT_EQ(fs0_->read_file("/fanstore/u1/" + path), content);
  }
  EXPECT_EQ(fs1_->open_descriptors(), 0u);
}

TEST_F(FileSystemTest, StatAndReaddir) {
  EXPECT_TRUE(fs0_->stat("/fanstore/u1").is_directory());
  auto top = fs0_->readdir("/fanstore/u1");
  EXPECT_EQ(top, std::vector<std::string>{"train"});
  const auto& [path, content] = *ds_.files.begin();
  EXPECT_EQ(fs0_->stat("/fanstore/u1/" + path).size_bytes, content.size());
  EXPECT_EQ(code_of([&] { fs0_->readdir("/fanstore/u1/" + path); }),
            Errc::kNotDirectory);
  EXPECT_EQ(cluster_->total_data_calls(), 0u);
  EXPECT_EQ(code_of([&] { fs0_->stat("/fanstore/u1/missing"); }), Errc::kNotFound);
}

TEST_F(FileSystemTest, Errors) {
  const auto& path = ds_.files.begin()->first;
  EXPECT_EQ(code_of([&] { fs0_->open("/fanstore/u1/" + path, OpenMode::kWrite); }),
            Errc::kAlreadyExists);
  EXPECT_EQ(code_of([&] { fs0_->open("/fanstore/u1/train", OpenMode::kRead); }),
            Errc::kIsDirectory);
  EXPECT_EQ(code_of([&] { fs0_->read(42, 1); }), Errc::kBadDescriptor);
  EXPECT_EQ(code_of([&] { fs0_->close(FileSystem::kFirstDescriptor + 999); }),
            Errc::kBadDescriptor);
  int fd = fs0_->open("/fanstore/u1/" + path, OpenMode::kRead);
  fs0_->close(fd);
  EXPECT_EQ(code_of([&] { fs0_->close(fd); }), Errc::kBadDescriptor);
  EXPECT_EQ(errc_to_errno(Errc::kNotFound), ENOENT);
  EXPECT_EQ(errc_to_errno(Errc::kAlreadyExists), EEXIST);
  EXPECT_EQ(errc_to_errno(Errc::kIsDirectory), EISDIR);
  EXPECT_EQ(errc_to_errno(Errc::kBadDescriptor), EBADF);
}

TEST_F(FileSystemTest, CheckpointVisibleFromOtherNode) {
  Bytes ckpt(4096, 0x42);
  int fd = fs0_->open("/fanstore/u1/ckpt/epoch1.h5", OpenMode::kWrite);
  EXPECT_EQ(fs0_->write(fd, ckpt), ckpt.size());
  EXPECT_EQ(code_of([&] { fs1_->stat("/fanstore/u1/ckpt/epoch1.h5"); }),
            Errc::kNotFound);
  fs0_->close(fd);
  EXPECT_EQ(fs1_->stat("/fanstore/u1/ckpt/epoch1.h5").size_bytes, ckpt.size());
  EXPECT_EQ(fs1_->read_file("/fanstore/u1/ckpt/epoch1.h5"), ckpt);
}

TEST_F(FileSystemTest, PassthroughMatchesHost) {
  fs::path host = dir_ / "host";
  fs::create_directories(host / "sub");
  Bytes data = {1, 2, 3, 4, 5};
  int fd = fs0_->open((host / "f.bin").string(), OpenMode::kWrite);
  EXPECT_GE(fd, FileSystem::kFirstDescriptor);
  fs0_->write(fd, data);
  fs0_->close(fd);
  EXPECT_EQ(testing::read_bytes(host / "f.bin"), data);
  EXPECT_EQ(fs0_->read_file((host / "f.bin").string()), data);

  struct stat st;
  ASSERT_EQ(::stat((host / "f.bin").c_str(), &st), 0);
  EXPECT_EQ(fs0_->stat((host / "f.bin").string()), meta_from_stat(st));
  EXPECT_EQ(fs0_->readdir(host.string()), (std::vector<std::string>{"f.bin", "sub"}));

  fd = fs0_->open((host / "f.bin").string(), OpenMode::kRead);
  EXPECT_EQ(fs0_->pread(fd, 2, 10), (Bytes{3, 4, 5}));
  fs0_->close(fd);
  EXPECT_EQ(code_of([&] { fs0_->open((host / "none").string(), OpenMode::kRead); }),
            Errc::kNotFound);
  EXPECT_EQ(code_of([&] { fs0_->readdir((host / "f.bin").string()); }),
            Errc::kNotDirectory);
}

TEST_F(FileSystemTest, MountFromSettings) {
  ClusterConfig c = make_local_config(1, dir_ / "solo", ds_.packed);
  c.nodes[0].port = 0;
  save_cluster_config(c, dir_ / "cluster.json");
  ClientSettings s;
  s.config = dir_ / "cluster.json";
  s.mount = "/data";
  s.node = 0;
  MountedNode mounted = mount_from_settings(s);
  const auto& [path, content] = *ds_.files.begin();
  EXPECT_EQ(mounted.fs->read_file("/data/" + path), content);
}

}  // namespace
}  // namespace fanstore
