#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrforge/csv.hpp"
#include "lrforge/tokenizer.hpp"

namespace lrforge::corpus {

struct CorpusRecord {
  std::string data;
  std::string source;
  std::string category;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// Streams records from a `data,source,category` CSV (columns in any order).
class RecordReader {
 public:
  // Throws Errc::io when the file cannot be opened, Errc::bad_header when
  // the header does not name exactly the three columns.
  explicit RecordReader(const std::string& path);

  // Throws Errc::malformed_row with the row number.
  bool next(CorpusRecord& record);

 private:
  std::ifstream in_;
  CsvReader reader_;
  std::size_t col_data_ = 0;
  std::size_t col_source_ = 0;
  std::size_t col_category_ = 0;
  std::vector<std::string> fields_;
};

std::vector<CorpusRecord> read_csv(const std::string& path);
void write_csv(const std::string& path, std::span<const CorpusRecord> records);

// ---------------------------------------------------------------------------
// Binary shards: 24-byte little-endian header then fixed-width token ids.
//
//   offset 0   4 bytes  magic "LRFG"
//   offset 4   u32      format version (1)
//   offset 8   u32      vocab_size
//   offset 12  u32      token_width (2 or 4)
//   offset 16  u64      token_count
//   offset 24  token_count * token_width bytes of ids

inline constexpr char kShardMagic[4] = {'L', 'R', 'F', 'G'};
inline constexpr std::uint32_t kShardVersion = 1;
inline constexpr std::size_t kShardHeaderBytes = 24;
inline constexpr std::size_t kDefaultShardTokens = 16'000'000;

constexpr std::uint32_t token_width_for(std::size_t vocab_size) noexcept {
  return vocab_size <= 65536 ? 2 : 4;
}

struct PackedShard {
  std::uint32_t vocab_size = 0;
  std::uint32_t token_width = 2;
  std::vector<TokenId> tokens;

  std::string serialize() const;
  // Throws Errc::data on a bad magic, version, width or length, or an id
  // outside the vocabulary.
  static PackedShard parse(std::string_view bytes);

  friend bool operator==(const PackedShard&, const PackedShard&) = default;
};

// Each document is encoded and followed by one EOT; shards are cut only
// between documents. Throws Errc::document_exceeds_shard.
std::vector<PackedShard> pack(std::span<const CorpusRecord> records, const Tokenizer& tok,
                              std::size_t shard_token_limit = kDefaultShardTokens);

// Streaming variant that writes shard_00000.bin, ... into `dir`. Returns the
// shard file paths in order.
struct PackSummary {
  std::vector<std::string> shard_paths;
  std::size_t documents = 0;
  std::size_t tokens = 0;  // including EOTs
};
PackSummary pack_to_dir(std::span<const CorpusRecord> records, const Tokenizer& tok,
                        const std::string& dir, std::size_t shard_token_limit = kDefaultShardTokens);

void write_shard(const PackedShard& shard, const std::string& path);
PackedShard read_shard(const std::string& path);

// Splits a token stream on EOT and decodes each document.
std::vector<std::string> unpack(std::span<const PackedShard> shards, const Tokenizer& tok);

struct SplitSpec {
  double val_fraction = 0.0;
  std::uint64_t seed = 1234;
};

struct SplitResult {
  std::vector<std::size_t> train;  // ascending shard indices
  std::vector<std::size_t> val;
};

// Seeded assignment of shards to train/val; |val| = round(fraction * n),
// capped so train keeps at least one shard.
SplitResult split(std::size_t shard_count, const SplitSpec& spec);

struct CategoryStats {
  std::size_t rows = 0;
  std::size_t bytes = 0;
  double byte_share_pct = 0;
  std::optional<std::size_t> tokens;
};

struct CorpusStats {
  std::size_t rows = 0;
  std::size_t bytes = 0;
  std::optional<std::size_t> tokens;  // includes one EOT per row
  std::map<std::string, CategoryStats> categories;

  std::optional<double> bytes_per_token() const;
  std::string to_csv() const;
};

CorpusStats corpus_stats(std::span<const CorpusRecord> records, const Tokenizer* tok = nullptr);

}  // namespace lrforge::corpus
