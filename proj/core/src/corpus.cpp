#include "lrforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "lrforge/error.hpp"
#include "lrforge/parallel.hpp"

namespace lrforge::corpus {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = width - 1; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  }
  return v;
}

std::string shard_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%05zu.bin", index);
  return buf;
}

// Encodes every record (in parallel) and returns per-document token lists.
std::vector<std::vector<TokenId>> encode_all(std::span<const CorpusRecord> records,
                                             const Tokenizer& tok) {
  std::vector<std::vector<TokenId>> encoded(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    encoded[i] = tok.encode(records[i].data);
    encoded[i].push_back(tok.eot_id());
  });
  return encoded;
}

template <typename Sink>
void cut_shards(const std::vector<std::vector<TokenId>>& docs, std::size_t limit, Sink&& emit) {
  std::vector<TokenId> current;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (d.size() > limit) {
      throw Error(Errc::document_exceeds_shard,
                  "document " + std::to_string(i) + " needs " + std::to_string(d.size()) +
                      " tokens (with EOT), shard limit is " + std::to_string(limit));
    }
    if (current.size() + d.size() > limit) {
      emit(std::move(current));
      current.clear();
    }
    current.insert(current.end(), d.begin(), d.end());
  }
  if (!current.empty()) emit(std::move(current));
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV records

RecordReader::RecordReader(const std::string& path)
    : in_(path, std::ios::binary), reader_(in_) {
  if (!in_) throw Error(Errc::io, "cannot open " + path);
  if (!reader_.next(fields_)) throw Error(Errc::bad_header, path + ": empty file");
  if (!fields_.empty() && fields_[0].rfind("\xEF\xBB\xBF", 0) == 0) fields_[0].erase(0, 3);
  bool has_data = false;
  bool has_source = false;
  bool has_category = false;
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i] == "data") { col_data_ = i; has_data = true; }
    if (fields_[i] == "source") { col_source_ = i; has_source = true; }
    if (fields_[i] == "category") { col_category_ = i; has_category = true; }
  }
  if (fields_.size() != 3 || !has_data || !has_source || !has_category) {
    throw Error(Errc::bad_header, path + ": header must be data,source,category");
  }
}

bool RecordReader::next(CorpusRecord& record) {
  while (reader_.next(fields_)) {
    if (fields_.size() == 1 && fields_[0].empty()) continue;  // blank line
    if (fields_.size() != 3) {
      throw Error(Errc::malformed_row, "row " + std::to_string(reader_.record_number()) +
                                           " (line " + std::to_string(reader_.start_line()) +
                                           "): expected 3 fields, got " +
                                           std::to_string(fields_.size()));
    }
    record.data = std::move(fields_[col_data_]);
    record.source = std::move(fields_[col_source_]);
    record.category = std::move(fields_[col_category_]);
    return true;
  }
  return false;
}

std::vector<CorpusRecord> read_csv(const std::string& path) {
  RecordReader reader(path);
  std::vector<CorpusRecord> records;
  CorpusRecord r;
  while (reader.next(r)) records.push_back(std::move(r));
  return records;
}

void write_csv(const std::string& path, std::span<const CorpusRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  CsvWriter w(out);
  w.write_row({"data", "source", "category"});
  for (const auto& r : records) w.write_row({r.data, r.source, r.category});
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Shards

std::string PackedShard::serialize() const {
  std::string out;
  out.reserve(kShardHeaderBytes + tokens.size() * token_width);
  out.append(kShardMagic, 4);
  put_u32(out, kShardVersion);
  put_u32(out, vocab_size);
  put_u32(out, token_width);
  put_u64(out, tokens.size());
  for (TokenId id : tokens) {
    for (std::uint32_t b = 0; b < token_width; ++b) {
      out.push_back(static_cast<char>((id >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

PackedShard PackedShard::parse(std::string_view bytes) {
  if (bytes.size() < kShardHeaderBytes) throw Error(Errc::data, "shard shorter than header");
  if (std::memcmp(bytes.data(), kShardMagic, 4) != 0) throw Error(Errc::data, "bad shard magic");
  if (get_le(bytes, 4, 4) != kShardVersion) throw Error(Errc::data, "unsupported shard version");
  PackedShard s;
  s.vocab_size = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  s.token_width = static_cast<std::uint32_t>(get_le(bytes, 12, 4));
  const std::uint64_t count = get_le(bytes, 16, 8);
  if (s.token_width != token_width_for(s.vocab_size)) {
    throw Error(Errc::data, "token width does not match vocab size");
  }
  if (bytes.size() - kShardHeaderBytes != count * s.token_width) {
    throw Error(Errc::data, "payload length does not match token count");
  }
  s.tokens.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto id = static_cast<TokenId>(
        get_le(bytes, kShardHeaderBytes + i * s.token_width, static_cast<int>(s.token_width)));
    if (id >= s.vocab_size) throw Error(Errc::data, "token id outside vocabulary");
    s.tokens[i] = id;
  }
  return s;
}

std::vector<PackedShard> pack(std::span<const CorpusRecord> records, const Tokenizer& tok,
                              std::size_t shard_token_limit) {
  const auto vocab_size = static_cast<std::uint32_t>(tok.vocab().size());
  std::vector<PackedShard> shards;
  cut_shards(encode_all(records, tok), shard_token_limit, [&](std::vector<TokenId>&& ids) {
    shards.push_back({vocab_size, token_width_for(vocab_size), std::move(ids)});
  });
  return shards;
}

void write_shard(const PackedShard& shard, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  const std::string bytes = shard.serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

PackedShard read_shard(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return PackedShard::parse(ss.str());
}

PackSummary pack_to_dir(std::span<const CorpusRecord> records, const Tokenizer& tok,
                        const std::string& dir, std::size_t shard_token_limit) {
  std::filesystem::create_directories(dir);
  const auto vocab_size = static_cast<std::uint32_t>(tok.vocab().size());
  PackSummary summary;
  summary.documents = records.size();
  // Documents are encoded in bounded batches so memory stays proportional to
  // the batch, not the corpus.
  constexpr std::size_t kBatch = 4096;
  std::vector<TokenId> current;
  const auto flush = [&] {
    const std::string path = (std::filesystem::path(dir) / shard_name(summary.shard_paths.size())).string();
    write_shard({vocab_size, token_width_for(vocab_size), current}, path);
    summary.shard_paths.push_back(path);
    current.clear();
  };
  for (std::size_t begin = 0; begin < records.size(); begin += kBatch) {
    const std::size_t end = std::min(records.size(), begin + kBatch);
    const auto docs = encode_all(records.subspan(begin, end - begin), tok);
    for (std::size_t k = 0; k < docs.size(); ++k) {
      const auto& d = docs[k];
      if (d.size() > shard_token_limit) {
        throw Error(Errc::document_exceeds_shard,
                    "document " + std::to_string(begin + k) + " needs " +
                        std::to_string(d.size()) + " tokens (with EOT), shard limit is " +
                        std::to_string(shard_token_limit));
      }
      if (current.size() + d.size() > shard_token_limit) flush();
      current.insert(current.end(), d.begin(), d.end());
      summary.tokens += d.size();
    }
  }
  if (!current.empty()) flush();
  return summary;
}

std::vector<std::string> unpack(std::span<const PackedShard> shards, const Tokenizer& tok) {
  std::vector<std::string> docs;
  std::vector<TokenId> current;
  for (const auto& shard : shards) {
    for (TokenId id : shard.tokens) {
      if (id == tok.eot_id()) {
        docs.push_back(tok.decode(current));
        current.clear();
      } else {
        current.push_back(id);
      }
    }
  }
  if (!current.empty()) docs.push_back(tok.decode(current));
  return docs;
}

// ---------------------------------------------------------------------------
// Split and statistics

SplitResult split(std::size_t shard_count, const SplitSpec& spec) {
  if (!(spec.val_fraction >= 0.0 && spec.val_fraction < 1.0)) {
    throw Error(Errc::config, "validation fraction must be in [0, 1)");
  }
  SplitResult result;
  if (shard_count == 0) return result;
  auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(shard_count)));
  n_val = std::min(n_val, shard_count - 1);

  // Fisher-Yates with an explicit bounded draw: std::shuffle and the
  // standard distributions are implementation-defined.
  std::vector<std::size_t> order(shard_count);
  for (std::size_t i = 0; i < shard_count; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = shard_count - 1; i > 0; --i) {
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    std::swap(order[i], order[static_cast<std::size_t>(r % bound)]);
  }
  result.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(result.val.begin(), result.val.end());
  std::sort(result.train.begin(), result.train.end());
  return result;
}

CorpusStats corpus_stats(std::span<const CorpusRecord> records, const Tokenizer* tok) {
  CorpusStats stats;
  stats.rows = records.size();
  std::vector<std::size_t> tokens;
  if (tok) {
    tokens.resize(records.size());
    parallel_for(records.size(), [&](std::size_t i) { tokens[i] = tok->count_tokens(records[i].data) + 1; });
    stats.tokens = 0;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& cat = stats.categories[records[i].category];
    ++cat.rows;
    cat.bytes += records[i].data.size();
    stats.bytes += records[i].data.size();
    if (tok) {
      cat.tokens = cat.tokens.value_or(0) + tokens[i];
      *stats.tokens += tokens[i];
    }
  }
  for (auto& [name, cat] : stats.categories) {
    cat.byte_share_pct =
        stats.bytes == 0 ? 0.0 : 100.0 * static_cast<double>(cat.bytes) / static_cast<double>(stats.bytes);
  }
  return stats;
}

std::optional<double> CorpusStats::bytes_per_token() const {
  if (!tokens || *tokens == 0) return std::nullopt;
  return static_cast<double>(bytes) / static_cast<double>(*tokens);
}

std::string CorpusStats::to_csv() const {
  std::ostringstream out;
  CsvWriter w(out);
  w.write_row({"category", "rows", "bytes", "byte_share_pct", "tokens"});
  const auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& [name, cat] : categories) {
    w.write_row({name, std::to_string(cat.rows), std::to_string(cat.bytes), pct(cat.byte_share_pct),
                 cat.tokens ? std::to_string(*cat.tokens) : ""});
  }
  w.write_row({"__total__", std::to_string(rows), std::to_string(bytes), pct(bytes ? 100.0 : 0.0),
               tokens ? std::to_string(*tokens) : ""});
  return out.str();
}

}  // namespace lrforge::corpus
