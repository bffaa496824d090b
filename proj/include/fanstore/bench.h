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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fanstore/bytes.h"
#include "fanstore/codec.h"

namespace fanstore::bench {

enum class ContentKind {
  kRandom,  // incompressible
  kText,    // word salad from a small vocabulary, compresses well
};

struct SizeClass {
  std::uint64_t file_size = 0;
  std::uint32_t count = 0;

  // Directory name of the class, e.g. "128KiB".
  std::string label() const;
};

// The four sweep classes with their full-scale counts divided by `divisor`
// (default 128: 128 KiB x 1024, 512 KiB x 256, 2 MiB x 64, 8 MiB x 16).
std::vector<SizeClass> sweep_classes(std::uint32_t divisor = 128);

// Parses "131072x1024,524288x256" or with K/M suffixes "128Kx1024,2Mx64".
std::vector<SizeClass> parse_classes(const std::string& text);

struct BenchSpec {
  std::vector<SizeClass> classes = sweep_classes();
  std::uint32_t nodes = 1;
  std::uint32_t threads = 4;
  std::uint32_t replication = 1;
  std::uint64_t seed = 42;
  ContentKind content = ContentKind::kRandom;

  // Training emulation.
  std::uint32_t epochs = 1;
  std::uint32_t batch = 64;  // per process
  std::uint32_t train_files = 1000;
  std::uint32_t val_files = 100;
  std::uint32_t train_dirs = 10;
  std::uint64_t sample_size = 16 * 1024;
  std::uint64_t checkpoint_size = 1 << 20;
  double compute_delay_ms = 0;  // per mini-batch; 500 mimics a GPU step

  // Packing.
  std::uint32_t partitions = 0;  // 0: 4 per node of the largest run
  std::optional<CodecId> codec;
};

struct GeneratedFile {
  std::string path;  // relative to the dataset root
  std::uint64_t size = 0;
  std::uint64_t digest = 0;  // FNV-1a 64 of the content
};

// Deterministic content of one generated file; depends only on seed, path,
// size and kind.
Bytes file_content(std::uint64_t seed, const std::string& path,
                   std::uint64_t size, ContentKind kind);

// Writes the sweep tree <out>/<class label>/f<NNNNNN> plus the index file
// <out>/bench_index.tsv ("path<TAB>size<TAB>digest" per line).
std::vector<GeneratedFile> gen_sweep_dataset(const BenchSpec& spec,
                                             const std::filesystem::path& out);

// Writes <out>/train/c<KK>/s<NNNNNN> and <out>/val/v<NNNNNN> of
// spec.sample_size bytes each, plus bench_index.tsv.
std::vector<GeneratedFile> gen_training_dataset(
    const BenchSpec& spec, const std::filesystem::path& out);

std::vector<GeneratedFile> read_index(const std::filesystem::path& dataset);
void write_index(const std::vector<GeneratedFile>& files,
                 const std::filesystem::path& dataset);

// Packs a generated dataset into <work>/packed and returns that directory.
std::filesystem::path pack_generated(const BenchSpec& spec,
                                     const std::filesystem::path& dataset,
                                     const std::filesystem::path& work,
                                     std::uint32_t partitions);

inline constexpr int kCsvSchemaVersion = 1;

// One CSV row per (node count, size class) for the sweep and per
// (node count, epoch) for training.
struct BenchRow {
  std::string mode;   // "sweep" or "train"
  std::string label;  // size class label, or "epoch<e>"
  std::uint32_t nodes = 0;
  std::uint32_t replication = 0;
  std::uint32_t threads = 0;
  std::uint64_t file_size = 0;  // 0 for training rows
  std::uint64_t files = 0;      // files read, all nodes together
  std::uint64_t bytes = 0;      // bytes read, all nodes together
  double wall_seconds = 0;      // slowest node
  double local_hit_fraction = 0;

  double bandwidth() const { return wall_seconds > 0 ? bytes / wall_seconds : 0; }
  double files_per_second() const {
    return wall_seconds > 0 ? files / wall_seconds : 0;
  }
};

struct TrainingCounts {
  std::uint64_t training_reads = 0;
  std::uint64_t test_reads = 0;
  std::uint32_t test_passes = 0;  // epochs in which every rank read all of val/
  std::uint32_t checkpoint_commits = 0;
  std::uint32_t checkpoints_visible = 0;  // epochs where every rank saw it
  std::uint64_t startup_metadata_ops = 0;
  std::uint64_t data_calls_during_startup = 0;
  // FNV-1a over the ordered per-rank access sequence, all ranks.
  std::uint64_t sequence_digest = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::optional<TrainingCounts> training;
};

// Header line plus one line per row. Columns:
//   schema,mode,label,nodes,replication,threads,file_size,files,bytes,
//   wall_s,bandwidth_Bps,files_per_s,local_hit_fraction
void write_csv(const BenchReport& report, std::ostream& out);
std::string csv_header();

// Reads every file of every class from every node process through the
// client facade, checking each digest. Runs once per node count in
// `node_counts`. Throws Error(kCorrupt) on any mismatch.
BenchReport run_read_sweep(const BenchSpec& spec,
                           const std::filesystem::path& dataset,
                           const std::filesystem::path& work,
                           const std::vector<std::uint32_t>& node_counts);

// Training I/O profile on spec.nodes processes: a startup stat/readdir walk,
// then per epoch shuffled mini-batches over train/, a full read of val/ by
// every rank and a checkpoint written by rank 0 that all ranks then stat.
BenchReport run_training_emulation(const BenchSpec& spec,
                                   const std::filesystem::path& dataset,
                                   const std::filesystem::path& work);

// The global access order for one epoch: a permutation of [0, n).
std::vector<std::uint32_t> epoch_permutation(std::uint64_t seed,
                                             std::uint32_t epoch,
                                             std::uint32_t n);

// Indices into the epoch permutation read by `rank` in `iteration`.
struct BatchSlice {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};
std::uint64_t iterations_per_epoch(std::uint64_t files, std::uint32_t batch,
                                   std::uint32_t ranks);
BatchSlice batch_slice(std::uint64_t files, std::uint32_t batch,
                       std::uint32_t ranks, std::uint64_t iteration,
                       std::uint32_t rank);

}  // namespace fanstore::bench
