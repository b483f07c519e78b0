#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lrforge {

using TokenId = std::uint32_t;

struct MergeRule {
  TokenId left;
  TokenId right;
  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

// Byte-level BPE vocabulary: ids 0..255 are raw bytes, merge k creates id
// 256 + k, and the single special token EOT takes the final id.
class Vocabulary {
 public:
  static constexpr std::size_t kByteTokens = 256;
  static constexpr std::size_t kSpecials = 1;

  Vocabulary();

  // Appends a merge and returns the new id. Throws Errc::data when either id
  // is not a mergeable token or the concatenation is already a token.
  TokenId add_merge(TokenId left, TokenId right);

  std::size_t size() const noexcept { return tokens_.size() + kSpecials; }
  std::size_t num_merges() const noexcept { return merges_.size(); }
  TokenId eot_id() const noexcept { return static_cast<TokenId>(tokens_.size()); }
  bool is_special(TokenId id) const noexcept { return id == eot_id(); }

  // Bytes of a non-special token. Throws Errc::unknown_id for id >= size();
  // EOT has no bytes and yields an empty string.
  const std::string& bytes_of(TokenId id) const;

  std::span<const MergeRule> merges() const noexcept { return merges_; }
  std::optional<TokenId> find(std::string_view bytes) const;

  // Rank of the merge joining (left, right), if any.
  std::optional<std::uint32_t> merge_rank(TokenId left, TokenId right) const noexcept {
    const auto it = rank_.find(pair_key(left, right));
    if (it == rank_.end()) return std::nullopt;
    return it->second;
  }

  static constexpr std::uint64_t pair_key(TokenId l, TokenId r) noexcept {
    return (static_cast<std::uint64_t>(l) << 32) | r;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.merges_ == b.merges_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<MergeRule> merges_;
  std::unordered_map<std::uint64_t, std::uint32_t> rank_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Collects chunk frequencies and runs the greedy merge loop.
//
// Pair counting is weighted by chunk frequency: each distinct pre-token chunk
// is stored once. The most frequent adjacent pair is merged next; ties go to
// the lexicographically smallest (left bytes, right bytes). A pair whose
// concatenation already exists as a token is skipped so every id keeps a
// unique byte sequence.
class BpeTrainer {
 public:
  void add_text(std::string_view text);
  // Parallel over texts; counts are reduced in a fixed order.
  void add_texts(std::span<const std::string> texts);

  std::size_t distinct_chunks() const noexcept { return chunk_freq_.size(); }

  // vocab_size counts bytes, merges and EOT. Throws Errc::config when
  // vocab_size < 258 and Errc::corpus_too_small when pairs run out.
  Vocabulary train(std::size_t vocab_size) const;

 private:
  std::unordered_map<std::string, std::uint64_t> chunk_freq_;
};

Vocabulary train_bpe(std::span<const std::string> corpus, std::size_t vocab_size);

class Tokenizer {
 public:
  explicit Tokenizer(Vocabulary vocab, std::string eot_marker = {});

  std::vector<TokenId> encode(std::string_view text) const;
  void encode_append(std::string_view text, std::vector<TokenId>& out) const;
  std::size_t count_tokens(std::string_view text) const;

  // Byte concatenation read back as UTF-8; invalid sequences become U+FFFD.
  // EOT decodes to the marker. Throws Errc::unknown_id.
  std::string decode(std::span<const TokenId> ids) const;
  std::string decode_bytes(std::span<const TokenId> ids) const;

  const Vocabulary& vocab() const noexcept { return vocab_; }
  TokenId eot_id() const noexcept { return vocab_.eot_id(); }

 private:
  void encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const;

  Vocabulary vocab_;
  std::string eot_marker_;
};

std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab);
std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab);

// Text format:
//   version 1
//   vocab_size N
//   specials EOT=<id>
//   <base64 left> <base64 right>      one line per merge, in rank order
void save_vocab(const Vocabulary& vocab, const std::string& path);
std::string serialize_vocab(const Vocabulary& vocab);
// Throws Errc::malformed_vocab_file naming the offending line.
Vocabulary parse_vocab(std::string_view text);
Vocabulary load_vocab(const std::string& path);

}  // namespace lrforge
