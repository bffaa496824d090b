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

#include "fanstore/bench.h"

#include <fcntl.h>

#include <algorithm>
#include <charconv>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "fanstore/client.h"
#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/io.h"
#include "fanstore/launcher.h"
#include "fanstore/partition.h"

namespace fanstore::bench {
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kIndexFile = "bench_index.tsv";
constexpr const char* kMount = "/fanstore";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string size_label(std::uint64_t bytes) {
  if (bytes >= (1u << 20) && bytes % (1u << 20) == 0) {
    return std::to_string(bytes >> 20) + "MiB";
  }
  if (bytes >= 1024 && bytes % 1024 == 0) return std::to_string(bytes >> 10) + "KiB";
  return std::to_string(bytes) + "B";
}

std::string numbered(const char* prefix, std::uint64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06" PRIu64, prefix, i);
  return buf;
}

void write_generated(const fs::path& root, const std::string& rel,
                     const Bytes& content) {
  fs::path p = root / rel;
  fs::create_directories(p.parent_path());
  UniqueFd fd = open_file(p, O_WRONLY | O_CREAT | O_TRUNC);
  write_all(fd.get(), content);
}

GeneratedFile generate_one(const BenchSpec& spec, const fs::path& out,
                           std::string rel, std::uint64_t size) {
  Bytes content = file_content(spec.seed, rel, size, spec.content);
  write_generated(out, rel, content);
  return GeneratedFile{std::move(rel), size, fnv1a64(content)};
}

// Per-node data-plane counters, sampled before and after a phase.
struct PlaneSample {
  std::uint64_t opens = 0;
  std::uint64_t remote = 0;

  static PlaneSample take(Node& node) {
    const auto& s = node.data().stats();
    return PlaneSample{s.opens.load(), s.remote_fetches.load()};
  }
};

json phase_json(const PlaneSample& before, const PlaneSample& after,
                std::uint64_t files, std::uint64_t bytes, double wall) {
  return json{{"files", files},
              {"bytes", bytes},
              {"wall", wall},
              {"opens", after.opens - before.opens},
              {"remote", after.remote - before.remote}};
}

// Reads `paths` through the facade with `threads` workers and verifies each
// file against `expected`. Returns total bytes read.
std::uint64_t parallel_read(FileSystem& fsys, const std::vector<const GeneratedFile*>& files,
                            std::uint32_t threads) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> bytes{0};
  std::mutex err_mu;
  std::string error;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      const GeneratedFile& f = *files[i];
      try {
        Bytes data = fsys.read_file(fsys.mount().to_mount(f.path));
        if (data.size() != f.size || fnv1a64(data) != f.digest) {
          throw Error(Errc::kCorrupt, "content mismatch for " + f.path);
        }
        bytes.fetch_add(data.size());
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (error.empty()) error = e.what();
        next.store(files.size());
      }
    }
  };
  std::vector<std::thread> pool;
  std::uint32_t n = std::max<std::uint32_t>(1, threads);
  for (std::uint32_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!error.empty()) throw Error(Errc::kCorrupt, "integrity failure: " + error);
  return bytes.load();
}

ClusterConfig fresh_cluster(const fs::path& work, const fs::path& packed,
                            std::uint32_t nodes, std::uint32_t replication,
                            std::vector<std::string> replicated_dirs) {
  fs::path base = work / ("cluster-" + std::to_string(nodes));
  fs::remove_all(base);
  return make_local_config(nodes, base, packed, std::min(replication, nodes),
                           std::move(replicated_dirs));
}

double hit_fraction(std::uint64_t opens, std::uint64_t remote) {
  return opens == 0 ? 0.0 : static_cast<double>(opens - remote) / opens;
}

}  // namespace

std::string SizeClass::label() const { return size_label(file_size); }

std::vector<SizeClass> sweep_classes(std::uint32_t divisor) {
  if (divisor == 0) throw Error(Errc::kInvalidArgument, "divisor must be positive");
  const std::uint32_t full[4] = {128 * 1024, 32 * 1024, 8 * 1024, 2 * 1024};
  const std::uint64_t sizes[4] = {128 << 10, 512 << 10, 2 << 20, 8 << 20};
  std::vector<SizeClass> out;
  for (int i = 0; i < 4; ++i) {
    out.push_back(SizeClass{sizes[i], std::max<std::uint32_t>(1, full[i] / divisor)});
  }
  return out;
}

std::vector<SizeClass> parse_classes(const std::string& text) {
  std::vector<SizeClass> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto x = item.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == item.size()) {
      throw Error(Errc::kInvalidArgument, "size class must be SIZExCOUNT: " + item);
    }
    std::string size = item.substr(0, x);
    std::uint64_t mult = 1;
    char suffix = size.back();
    if (suffix == 'K' || suffix == 'k') mult = 1024;
    if (suffix == 'M' || suffix == 'm') mult = 1 << 20;
    if (mult != 1) size.pop_back();
    auto number = [&](const std::string& digits) -> std::uint64_t {
      std::uint64_t v = 0;
      auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
        throw Error(Errc::kInvalidArgument, "bad size class: " + item);
      }
      return v;
    };
    std::uint64_t count = number(item.substr(x + 1));
    if (count > 0xffffffffULL) {
      throw Error(Errc::kInvalidArgument, "class count too large: " + item);
    }
    out.push_back(SizeClass{number(size) * mult, static_cast<std::uint32_t>(count)});
  }
  if (out.empty()) throw Error(Errc::kInvalidArgument, "no size classes given");
  return out;
}

Bytes file_content(std::uint64_t seed, const std::string& path,
                   std::uint64_t size, ContentKind kind) {
  Fnv1a64 h;
  Bytes seed_bytes;
  append_le(seed_bytes, seed);
  h.update(seed_bytes);
  h.update(path);
  std::mt19937_64 rng(h.digest());
  Bytes out(size);
  if (kind == ContentKind::kRandom) {
    std::size_t i = 0;
    for (; i + 8 <= size; i += 8) store_le<std::uint64_t>(out.data() + i, rng());
    std::uint64_t tail = rng();
    for (; i < size; ++i, tail >>= 8) out[i] = static_cast<std::uint8_t>(tail);
    return out;
  }
  static const char* const kWords[] = {
      "the",    "gradient", "tensor", "epoch",  "batch",   "layer",  "weight",
      "loss",   "image",    "label",  "train",  "sample",  "node",   "store",
      "file",   "of",       "and",    "a",      "to",      "in",     "model",
      "input",  "output",   "kernel", "stride", "channel", "pixel",  "class"};
  constexpr std::size_t kVocab = sizeof kWords / sizeof kWords[0];
  std::size_t i = 0;
  while (i < size) {
    const char* w = kWords[rng() % kVocab];
    for (; *w != '\0' && i < size; ++w) out[i++] = static_cast<std::uint8_t>(*w);
    if (i < size) out[i++] = (rng() % 11 == 0) ? '\n' : ' ';
  }
  return out;
}

void write_index(const std::vector<GeneratedFile>& files, const fs::path& dataset) {
  std::string text;
  for (const auto& f : files) {
    text += f.path + "\t" + std::to_string(f.size) + "\t" + hex64(f.digest) + "\n";
  }
  write_file_atomic(dataset / kIndexFile, as_bytes(text));
}

std::vector<GeneratedFile> read_index(const fs::path& dataset) {
  std::vector<GeneratedFile> out;
  std::stringstream ss(read_text_file(dataset / kIndexFile));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto a = line.find('\t');
    auto b = line.find('\t', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw Error(Errc::kCorrupt, "malformed index line: " + line);
    }
    out.push_back(GeneratedFile{line.substr(0, a),
                                std::stoull(line.substr(a + 1, b - a - 1)),
                                std::stoull(line.substr(b + 1), nullptr, 16)});
  }
  return out;
}

std::vector<GeneratedFile> gen_sweep_dataset(const BenchSpec& spec,
                                             const fs::path& out) {
  std::vector<GeneratedFile> files;
  for (const auto& c : spec.classes) {
    for (std::uint32_t i = 0; i < c.count; ++i) {
      files.push_back(generate_one(spec, out, c.label() + "/" + numbered("f", i),
                                   c.file_size));
    }
  }
  write_index(files, out);
  return files;
}

std::vector<GeneratedFile> gen_training_dataset(const BenchSpec& spec,
                                                const fs::path& out) {
  std::vector<GeneratedFile> files;
  const std::uint32_t dirs = std::max<std::uint32_t>(1, spec.train_dirs);
  for (std::uint32_t i = 0; i < spec.train_files; ++i) {
    char dir[16];
    std::snprintf(dir, sizeof dir, "c%02u", i % dirs);
    files.push_back(generate_one(
        spec, out, std::string("train/") + dir + "/" + numbered("s", i),
        spec.sample_size));
  }
  for (std::uint32_t i = 0; i < spec.val_files; ++i) {
    files.push_back(
        generate_one(spec, out, "val/" + numbered("v", i), spec.sample_size));
  }
  write_index(files, out);
  return files;
}

fs::path pack_generated(const BenchSpec& spec, const fs::path& dataset,
                        const fs::path& work, std::uint32_t partitions) {
  std::vector<std::string> paths;
  for (const auto& f : read_index(dataset)) paths.push_back(f.path);
  fs::path packed = work / "packed";
  fs::remove_all(packed);
  PackOptions options;
  options.codec = spec.codec;
  pack_dataset(paths, dataset, partitions, options, packed);
  return packed;
}

std::string csv_header() {
  return "schema,mode,label,nodes,replication,threads,file_size,files,bytes,"
         "wall_s,bandwidth_Bps,files_per_s,local_hit_fraction";
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << csv_header() << "\n";
  for (const auto& r : report.rows) {
    char nums[256];
    std::snprintf(nums, sizeof nums, "%.6f,%.1f,%.2f,%.4f", r.wall_seconds,
                  r.bandwidth(), r.files_per_second(), r.local_hit_fraction);
    out << kCsvSchemaVersion << "," << r.mode << "," << r.label << "," << r.nodes
        << "," << r.replication << "," << r.threads << "," << r.file_size << ","
        << r.files << "," << r.bytes << "," << nums << "\n";
  }
}

BenchReport run_read_sweep(const BenchSpec& spec, const fs::path& dataset,
                           const fs::path& work,
                           const std::vector<std::uint32_t>& node_counts) {
  const std::vector<GeneratedFile> index = read_index(dataset);
  std::uint32_t max_nodes = 1;
  for (auto n : node_counts) max_nodes = std::max(max_nodes, n);
  std::uint32_t partitions = spec.partitions != 0 ? spec.partitions : 4 * max_nodes;
  fs::path packed = pack_generated(spec, dataset, work, partitions);

  // Files of each class, in index order.
  std::vector<std::vector<const GeneratedFile*>> by_class(spec.classes.size());
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    std::string prefix = spec.classes[c].label() + "/";
    for (const auto& f : index) {
      if (f.path.starts_with(prefix)) by_class[c].push_back(&f);
    }
    if (by_class[c].size() != spec.classes[c].count) {
      throw Error(Errc::kInvalidArgument,
                  "dataset does not match class " + spec.classes[c].label());
    }
  }

  BenchReport report;
  for (std::uint32_t m : node_counts) {
    ClusterConfig config = fresh_cluster(work, packed, m, spec.replication, {});
    auto results = ForkedCluster::run(
        config, packed / kManifestFileName, [&](ProcessContext& ctx) {
          FileSystem fsys(ctx.node(), kMount);
          json classes = json::array();
          for (const auto& files : by_class) {
            ctx.barrier();
            PlaneSample before = PlaneSample::take(ctx.node());
            auto t0 = Clock::now();
            std::uint64_t bytes = parallel_read(fsys, files, spec.threads);
            double wall = seconds_since(t0);
            classes.push_back(phase_json(before, PlaneSample::take(ctx.node()),
                                         files.size(), bytes, wall));
          }
          return json{{"classes", classes}};
        });
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      BenchRow row;
      row.mode = "sweep";
      row.label = spec.classes[c].label();
      row.nodes = m;
      row.replication = std::min(spec.replication, m);
      row.threads = spec.threads;
      row.file_size = spec.classes[c].file_size;
      std::uint64_t opens = 0, remote = 0;
      for (const auto& r : results) {
        const json& j = r.at("classes").at(c);
        row.files += j.at("files").get<std::uint64_t>();
        row.bytes += j.at("bytes").get<std::uint64_t>();
        row.wall_seconds = std::max(row.wall_seconds, j.at("wall").get<double>());
        opens += j.at("opens").get<std::uint64_t>();
        remote += j.at("remote").get<std::uint64_t>();
      }
      row.local_hit_fraction = hit_fraction(opens, remote);
      report.rows.push_back(row);
    }
  }
  return report;
}

std::vector<std::uint32_t> epoch_permutation(std::uint64_t seed,
                                             std::uint32_t epoch,
                                             std::uint32_t n) {
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + epoch);
  for (std::uint32_t i = n; i > 1; --i) {
    std::uint32_t j = static_cast<std::uint32_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::uint64_t iterations_per_epoch(std::uint64_t files, std::uint32_t batch,
                                   std::uint32_t ranks) {
  std::uint64_t global = std::uint64_t{batch} * ranks;
  if (global == 0) throw Error(Errc::kInvalidArgument, "batch and ranks must be positive");
  return (files + global - 1) / global;
}

BatchSlice batch_slice(std::uint64_t files, std::uint32_t batch,
                       std::uint32_t ranks, std::uint64_t iteration,
                       std::uint32_t rank) {
  std::uint64_t global = std::uint64_t{batch} * ranks;
  std::uint64_t iter_end = std::min(files, (iteration + 1) * global);
  std::uint64_t begin = std::min(iter_end, iteration * global + std::uint64_t{rank} * batch);
  std::uint64_t end = std::min(iter_end, begin + batch);
  return BatchSlice{begin, end};
}

BenchReport run_training_emulation(const BenchSpec& spec, const fs::path& dataset,
                                   const fs::path& work) {
  const std::vector<GeneratedFile> index = read_index(dataset);
  std::vector<const GeneratedFile*> train, val;
  for (const auto& f : index) {
    if (f.path.starts_with("train/")) train.push_back(&f);
    if (f.path.starts_with("val/")) val.push_back(&f);
  }
  if (train.empty()) throw Error(Errc::kInvalidArgument, "dataset has no train/ files");
  const std::uint32_t m = std::max<std::uint32_t>(1, spec.nodes);
  std::uint32_t partitions = spec.partitions != 0 ? spec.partitions : 4 * m;
  fs::path packed = pack_generated(spec, dataset, work, partitions);
  ClusterConfig config = fresh_cluster(work, packed, m, spec.replication, {"val"});
  const auto n = static_cast<std::uint32_t>(train.size());
  const std::uint64_t iterations = iterations_per_epoch(n, spec.batch, m);

  auto results = ForkedCluster::run(
      config, packed / kManifestFileName, [&](ProcessContext& ctx) {
        FileSystem fsys(ctx.node(), kMount);
        const std::uint32_t rank = ctx.rank();

        // Startup: walk the namespace with readdir and stat.
        std::uint64_t calls_before = ctx.node().peers().counters().data_calls();
        std::uint64_t meta_ops = 0;
        std::vector<std::string> stack{kMount};
        while (!stack.empty()) {
          std::string dir = stack.back();
          stack.pop_back();
          ++meta_ops;
          for (const auto& name : fsys.readdir(dir)) {
            std::string child = dir + "/" + name;
            ++meta_ops;
            if (fsys.stat(child).is_directory()) stack.push_back(child);
          }
        }
        std::uint64_t startup_calls =
            ctx.node().peers().counters().data_calls() - calls_before;

        Fnv1a64 sequence;
        json epochs = json::array();
        std::uint64_t train_reads = 0, test_reads = 0;
        std::uint32_t test_passes = 0, commits = 0, visible = 0;
        for (std::uint32_t e = 0; e < spec.epochs; ++e) {
          auto perm = epoch_permutation(spec.seed, e, n);
          ctx.barrier();
          PlaneSample before = PlaneSample::take(ctx.node());
          auto t0 = Clock::now();
          std::uint64_t epoch_files = 0, epoch_bytes = 0;
          for (std::uint64_t it = 0; it < iterations; ++it) {
            BatchSlice s = batch_slice(n, spec.batch, m, it, rank);
            std::vector<const GeneratedFile*> batch;
            for (std::uint64_t k = s.begin; k < s.end; ++k) {
              batch.push_back(train[perm[k]]);
              sequence.update(train[perm[k]]->path);
              sequence.update("\n");
            }
            epoch_bytes += parallel_read(fsys, batch, spec.threads);
            epoch_files += batch.size();
            if (spec.compute_delay_ms > 0) {
              std::this_thread::sleep_for(
                  std::chrono::duration<double, std::milli>(spec.compute_delay_ms));
            }
            ctx.barrier();  // gradient exchange
          }
          double wall = seconds_since(t0);
          json row = phase_json(before, PlaneSample::take(ctx.node()), epoch_files,
                                epoch_bytes, wall);
          train_reads += epoch_files;

          parallel_read(fsys, val, spec.threads);
          test_reads += val.size();
          ++test_passes;

          std::string ckpt = std::string(kMount) + "/ckpt/epoch_" + std::to_string(e);
          if (rank == 0) {
            Bytes content = file_content(spec.seed, ckpt, spec.checkpoint_size,
                                         ContentKind::kRandom);
            int fd = fsys.open(ckpt, OpenMode::kWrite);
            fsys.write(fd, content);
            fsys.close(fd);
            ++commits;
          }
          ctx.barrier();
          FileMeta meta = fsys.stat(ckpt);
          if (meta.size_bytes == spec.checkpoint_size) ++visible;
          epochs.push_back(row);
        }
        ctx.barrier();
        return json{{"train_reads", train_reads},
                    {"test_reads", test_reads},
                    {"test_passes", test_passes},
                    {"commits", commits},
                    {"visible", visible},
                    {"meta_ops", meta_ops},
                    {"startup_calls", startup_calls},
                    {"sequence", sequence.digest()},
                    {"epochs", epochs}};
      });

  BenchReport report;
  TrainingCounts counts;
  counts.test_passes = spec.epochs;
  counts.checkpoints_visible = spec.epochs;
  Fnv1a64 combined;
  for (const auto& r : results) {
    counts.training_reads += r.at("train_reads").get<std::uint64_t>();
    counts.test_reads += r.at("test_reads").get<std::uint64_t>();
    counts.test_passes = std::min(counts.test_passes, r.at("test_passes").get<std::uint32_t>());
    counts.checkpoint_commits += r.at("commits").get<std::uint32_t>();
    counts.checkpoints_visible =
        std::min(counts.checkpoints_visible, r.at("visible").get<std::uint32_t>());
    counts.startup_metadata_ops += r.at("meta_ops").get<std::uint64_t>();
    counts.data_calls_during_startup += r.at("startup_calls").get<std::uint64_t>();
    std::uint64_t seq = r.at("sequence").get<std::uint64_t>();
    Bytes seq_bytes;
    append_le(seq_bytes, seq);
    combined.update(seq_bytes);
  }
  counts.sequence_digest = combined.digest();
  for (std::uint32_t e = 0; e < spec.epochs; ++e) {
    BenchRow row;
    row.mode = "train";
    row.label = "epoch" + std::to_string(e);
    row.nodes = m;
    row.replication = std::min(spec.replication, m);
    row.threads = spec.threads;
    std::uint64_t opens = 0, remote = 0;
    for (const auto& r : results) {
      const json& j = r.at("epochs").at(e);
      row.files += j.at("files").get<std::uint64_t>();
      row.bytes += j.at("bytes").get<std::uint64_t>();
      row.wall_seconds = std::max(row.wall_seconds, j.at("wall").get<double>());
      opens += j.at("opens").get<std::uint64_t>();
      remote += j.at("remote").get<std::uint64_t>();
    }
    row.file_size = row.files == 0 ? 0 : row.bytes / row.files;
    row.local_hit_fraction = hit_fraction(opens, remote);
    report.rows.push_back(row);
  }
  report.training = counts;
  return report;
}

}  // namespace fanstore::bench
