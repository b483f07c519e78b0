#include "lrforge/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "lrforge/base64.hpp"
#include "lrforge/error.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/pretokenize.hpp"
#include "lrforge/utf8.hpp"

namespace lrforge {

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() {
  tokens_.reserve(kByteTokens);
  for (std::size_t b = 0; b < kByteTokens; ++b) {
    tokens_.emplace_back(1, static_cast<char>(b));
    ids_.emplace(tokens_.back(), static_cast<TokenId>(b));
  }
}

TokenId Vocabulary::add_merge(TokenId left, TokenId right) {
  if (left >= tokens_.size() || right >= tokens_.size()) {
    throw Error(Errc::data, "merge refers to an unknown token");
  }
  std::string bytes = tokens_[left] + tokens_[right];
  if (ids_.count(bytes)) throw Error(Errc::data, "merge would duplicate an existing token");
  if (rank_.count(pair_key(left, right))) throw Error(Errc::data, "duplicate merge");
  const auto id = static_cast<TokenId>(tokens_.size());
  rank_.emplace(pair_key(left, right), static_cast<std::uint32_t>(merges_.size()));
  merges_.push_back({left, right});
  ids_.emplace(bytes, id);
  tokens_.push_back(std::move(bytes));
  return id;
}

const std::string& Vocabulary::bytes_of(TokenId id) const {
  static const std::string kEmpty;
  if (id < tokens_.size()) return tokens_[id];
  if (id == eot_id()) return kEmpty;
  throw Error(Errc::unknown_id, "token id " + std::to_string(id) + " >= vocab size " +
                                    std::to_string(size()));
}

std::optional<TokenId> Vocabulary::find(std::string_view bytes) const {
  const auto it = ids_.find(std::string(bytes));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Training

void BpeTrainer::add_text(std::string_view text) {
  for (const Chunk& c : pretokenize(text)) ++chunk_freq_[std::string(c.text)];
}

void BpeTrainer::add_texts(std::span<const std::string> texts) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(max_threads(), texts.size()));
  std::vector<std::unordered_map<std::string, std::uint64_t>> partial(workers);
  parallel_for(workers, [&](std::size_t w) {
    const std::size_t begin = texts.size() * w / workers;
    const std::size_t end = texts.size() * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      for (const Chunk& c : pretokenize(texts[i])) ++partial[w][std::string(c.text)];
    }
  });
  for (auto& part : partial) {
    for (auto& [chunk, n] : part) chunk_freq_[chunk] += n;
  }
}

namespace {

struct HeapEntry {
  std::int64_t count;
  TokenId left;
  TokenId right;
};

}  // namespace

Vocabulary BpeTrainer::train(std::size_t vocab_size) const {
  const std::size_t floor = Vocabulary::kByteTokens + 1 + Vocabulary::kSpecials;
  if (vocab_size < floor) {
    throw Error(Errc::config, "vocab_size must be >= " + std::to_string(floor));
  }
  const std::size_t target_merges = vocab_size - Vocabulary::kByteTokens - Vocabulary::kSpecials;
  Vocabulary vocab;

  // Distinct chunks in byte order so every internal iteration is reproducible.
  std::vector<std::pair<std::string_view, std::uint64_t>> chunks;
  chunks.reserve(chunk_freq_.size());
  for (const auto& [text, freq] : chunk_freq_) chunks.emplace_back(text, freq);
  std::sort(chunks.begin(), chunks.end());

  std::vector<std::vector<TokenId>> words;
  std::vector<std::int64_t> freqs;
  words.reserve(chunks.size());
  for (const auto& [text, freq] : chunks) {
    if (text.size() < 2) continue;
    std::vector<TokenId> seq(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) seq[i] = static_cast<unsigned char>(text[i]);
    words.push_back(std::move(seq));
    freqs.push_back(static_cast<std::int64_t>(freq));
  }

  std::unordered_map<std::uint64_t, std::int64_t> counts;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    const auto& seq = words[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const auto key = Vocabulary::pair_key(seq[i], seq[i + 1]);
      counts[key] += freqs[w];
      auto& list = where[key];
      if (list.empty() || list.back() != w) list.push_back(w);
    }
  }

  const auto lower_priority = [&vocab](const HeapEntry& a, const HeapEntry& b) {
    if (a.count != b.count) return a.count < b.count;
    const int cl = vocab.bytes_of(a.left).compare(vocab.bytes_of(b.left));
    if (cl != 0) return cl > 0;
    return vocab.bytes_of(a.right).compare(vocab.bytes_of(b.right)) > 0;
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(lower_priority)> heap(
      lower_priority);
  for (const auto& [key, n] : counts) {
    heap.push({n, static_cast<TokenId>(key >> 32), static_cast<TokenId>(key & 0xFFFFFFFF)});
  }

  std::unordered_set<std::uint64_t> skipped;
  std::vector<std::uint32_t> stamp(words.size(), std::numeric_limits<std::uint32_t>::max());
  std::unordered_map<std::uint64_t, std::int64_t> delta;

  while (vocab.num_merges() < target_merges) {
    if (heap.empty()) {
      throw Error(Errc::corpus_too_small,
                  "ran out of pairs after " + std::to_string(vocab.num_merges()) + " of " +
                      std::to_string(target_merges) + " merges");
    }
    const HeapEntry top = heap.top();
    heap.pop();
    const auto key = Vocabulary::pair_key(top.left, top.right);
    const auto cit = counts.find(key);
    if (cit == counts.end() || cit->second != top.count || skipped.count(key)) continue;
    if (vocab.find(vocab.bytes_of(top.left) + vocab.bytes_of(top.right))) {
      skipped.insert(key);
      continue;
    }

    const TokenId merged = vocab.add_merge(top.left, top.right);
    const auto merge_no = static_cast<std::uint32_t>(vocab.num_merges());
    delta.clear();

    const std::vector<std::uint32_t> affected = std::move(where[key]);
    where.erase(key);
    for (std::uint32_t w : affected) {
      if (stamp[w] == merge_no) continue;
      stamp[w] = merge_no;
      auto& seq = words[w];
      const std::int64_t f = freqs[w];

      bool present = false;
      for (std::size_t i = 0; i + 1 < seq.size() && !present; ++i) {
        present = seq[i] == top.left && seq[i + 1] == top.right;
      }
      if (!present) continue;

      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        delta[Vocabulary::pair_key(seq[i], seq[i + 1])] -= f;
      }
      std::size_t out = 0;
      for (std::size_t i = 0; i < seq.size();) {
        if (i + 1 < seq.size() && seq[i] == top.left && seq[i + 1] == top.right) {
          seq[out++] = merged;
          i += 2;
        } else {
          seq[out++] = seq[i++];
        }
      }
      seq.resize(out);
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const auto k = Vocabulary::pair_key(seq[i], seq[i + 1]);
        delta[k] += f;
        if (seq[i] == merged || seq[i + 1] == merged) {
          auto& list = where[k];
          if (list.empty() || list.back() != w) list.push_back(w);
        }
      }
    }

    for (const auto& [k, d] : delta) {
      if (d == 0) continue;
      auto& c = counts[k];
      c += d;
      if (c <= 0) {
        counts.erase(k);
        where.erase(k);
      } else {
        heap.push({c, static_cast<TokenId>(k >> 32), static_cast<TokenId>(k & 0xFFFFFFFF)});
      }
    }
  }
  return vocab;
}

Vocabulary train_bpe(std::span<const std::string> corpus, std::size_t vocab_size) {
  BpeTrainer trainer;
  trainer.add_texts(corpus);
  return trainer.train(vocab_size);
}

// ---------------------------------------------------------------------------
// Encoding

Tokenizer::Tokenizer(Vocabulary vocab, std::string eot_marker)
    : vocab_(std::move(vocab)), eot_marker_(std::move(eot_marker)) {}

void Tokenizer::encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const {
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<TokenId> ids(chunk.size());
  for (std::size_t i = 0; i < chunk.size(); ++i) ids[i] = static_cast<unsigned char>(chunk[i]);
  if (ids.size() >= 2 && vocab_.num_merges() > 0) {
    const auto rank_at = [&](std::size_t i) {
      return vocab_.merge_rank(ids[i], ids[i + 1]).value_or(kNone);
    };
    std::vector<std::uint32_t> ranks(ids.size() - 1);
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) ranks[i] = rank_at(i);

    while (ids.size() >= 2) {
      const auto best = *std::min_element(ranks.begin(), ranks.end());
      if (best == kNone) break;
      const MergeRule rule = vocab_.merges()[best];
      const auto merged = static_cast<TokenId>(Vocabulary::kByteTokens + best);
      // Apply every occurrence of the lowest-ranked pair, left to right.
      std::size_t out_i = 0;
      for (std::size_t i = 0; i < ids.size();) {
        if (i + 1 < ids.size() && ids[i] == rule.left && ids[i + 1] == rule.right) {
          ids[out_i++] = merged;
          i += 2;
        } else {
          ids[out_i++] = ids[i++];
        }
      }
      ids.resize(out_i);
      ranks.resize(ids.empty() ? 0 : ids.size() - 1);
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) ranks[i] = rank_at(i);
    }
  }
  out.insert(out.end(), ids.begin(), ids.end());
}

void Tokenizer::encode_append(std::string_view text, std::vector<TokenId>& out) const {
  for (const Chunk& c : pretokenize(text)) encode_chunk(c.text, out);
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size() / 3 + 1);
  encode_append(text, out);
  return out;
}

std::size_t Tokenizer::count_tokens(std::string_view text) const {
  std::vector<TokenId> scratch;
  encode_append(text, scratch);
  return scratch.size();
}

std::string Tokenizer::decode_bytes(std::span<const TokenId> ids) const {
  std::string bytes;
  for (TokenId id : ids) {
    if (id == vocab_.eot_id()) {
      bytes += eot_marker_;
    } else {
      bytes += vocab_.bytes_of(id);
    }
  }
  return bytes;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  return utf8::sanitize(decode_bytes(ids));
}

std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab) {
  return Tokenizer(vocab).encode(text);
}

std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  return Tokenizer(vocab).decode(ids);
}

// ---------------------------------------------------------------------------
// Persistence

std::string serialize_vocab(const Vocabulary& vocab) {
  std::string out;
  out += "version 1\n";
  out += "vocab_size " + std::to_string(vocab.size()) + "\n";
  out += "specials EOT=" + std::to_string(vocab.eot_id()) + "\n";
  for (const MergeRule& m : vocab.merges()) {
    out += base64::encode(vocab.bytes_of(m.left));
    out += ' ';
    out += base64::encode(vocab.bytes_of(m.right));
    out += '\n';
  }
  return out;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << serialize_vocab(vocab);
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

Vocabulary parse_vocab(std::string_view text) {
  std::size_t pos = 0;
  int line_no = 0;
  const auto fail = [&](const std::string& what) -> Error {
    return Error(Errc::malformed_vocab_file, "line " + std::to_string(line_no) + ": " + what);
  };
  const auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, eol - pos);
      pos = eol + 1;
    }
    ++line_no;
    return true;
  };
  const auto header_value = [&](std::string_view prefix) {
    std::string_view line;
    if (!next_line(line)) {
      ++line_no;
      throw fail("unexpected end of file, expected `" + std::string(prefix) + "`");
    }
    if (line.substr(0, prefix.size()) != prefix) {
      throw fail("expected `" + std::string(prefix) + "`");
    }
    return line.substr(prefix.size());
  };
  const auto to_count = [&](std::string_view s) {
    std::size_t v = 0;
    if (s.empty()) throw fail("missing number");
    for (char c : s) {
      if (c < '0' || c > '9') throw fail("not a number: " + std::string(s));
      v = v * 10 + static_cast<std::size_t>(c - '0');
      if (v > (1u << 30)) throw fail("number too large");
    }
    return v;
  };

  if (header_value("version ") != "1") throw fail("unsupported version");
  const std::size_t vocab_size = to_count(header_value("vocab_size "));
  if (vocab_size < Vocabulary::kByteTokens + Vocabulary::kSpecials) {
    throw fail("vocab_size below byte alphabet plus specials");
  }
  const std::size_t eot = to_count(header_value("specials EOT="));
  if (eot != vocab_size - 1) throw fail("EOT must take the final id");

  Vocabulary vocab;
  const std::size_t merges = vocab_size - Vocabulary::kByteTokens - Vocabulary::kSpecials;
  for (std::size_t k = 0; k < merges; ++k) {
    std::string_view line;
    if (!next_line(line)) {
      ++line_no;
      throw fail("truncated: expected " + std::to_string(merges) + " merges, found " +
                 std::to_string(k));
    }
    const std::size_t space = line.find(' ');
    if (space == std::string_view::npos) throw fail("expected two base64 fields");
    const auto left = base64::decode(line.substr(0, space));
    const auto right = base64::decode(line.substr(space + 1));
    if (!left || !right || left->empty() || right->empty()) throw fail("bad base64 field");
    const auto l = vocab.find(*left);
    const auto r = vocab.find(*right);
    if (!l || !r) throw fail("merge refers to a token not defined by earlier lines");
    try {
      vocab.add_merge(*l, *r);
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  std::string_view rest;
  while (next_line(rest)) {
    if (!rest.empty()) throw fail("trailing content after last merge");
  }
  return vocab;
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_vocab(ss.str());
  } catch (const Error& e) {
    if (e.code() == Errc::malformed_vocab_file) {
      throw Error(Errc::malformed_vocab_file, path + ": " + std::string(e.what()));
    }
    throw;
  }
}

}  // namespace lrforge
