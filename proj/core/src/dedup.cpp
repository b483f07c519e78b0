#include "lrforge/dedup.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lrforge/error.hpp"
#include "lrforge/hash.hpp"
#include "lrforge/parallel.hpp"
#include "lrforge/utf8.hpp"

namespace lrforge::dedup {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t kMersenne61 = (1ULL << 61) - 1;

constexpr std::uint64_t mod_mersenne(u128 v) noexcept {
  std::uint64_t r = static_cast<std::uint64_t>(v & kMersenne61) +
                    static_cast<std::uint64_t>(v >> 61);
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  char32_t cp = 0;
  while (pos < text.size()) {
    const std::size_t at = pos;
    const bool valid = utf8::next(text, pos, cp);
    const bool space = valid && utf8::is_space(cp);
    if (space) {
      if (start != std::string_view::npos) words.push_back(text.substr(start, at - start));
      start = std::string_view::npos;
    } else if (start == std::string_view::npos) {
      start = at;
    }
  }
  if (start != std::string_view::npos) words.push_back(text.substr(start));
  return words;
}

struct UnionFind {
  std::vector<DocId> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  DocId find(DocId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(DocId a, DocId b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ShingleSet shingles(std::string_view text, std::size_t k) {
  if (k == 0) throw Error(Errc::config, "shingle width must be >= 1");
  ShingleSet set{k, {}};
  const auto words = split_words(text);
  if (words.empty()) return set;
  if (words.size() < k) {
    set.elements.push_back(mix64(fnv1a64(text)));
    return set;
  }
  set.elements.reserve(words.size() - k + 1);
  for (std::size_t i = 0; i + k <= words.size(); ++i) {
    std::uint64_t h = fnv1a64(words[i]);
    for (std::size_t j = 1; j < k; ++j) {
      h = fnv1a64(" ", h);
      h = fnv1a64(words[i + j], h);
    }
    set.elements.push_back(mix64(h));
  }
  std::sort(set.elements.begin(), set.elements.end());
  set.elements.erase(std::unique(set.elements.begin(), set.elements.end()), set.elements.end());
  return set;
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
  if (a.elements.empty() && b.elements.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.elements.begin();
  auto ib = b.elements.begin();
  while (ia != a.elements.end() && ib != b.elements.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.elements.size() + b.elements.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

PermutationSeeds make_seeds(std::size_t num_perms, std::uint64_t seed) {
  PermutationSeeds s;
  s.a.reserve(num_perms);
  s.b.reserve(num_perms);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < num_perms; ++i) {
    std::uint64_t a = 0;
    while (a == 0) a = splitmix64(state) % kMersenne61;
    s.a.push_back(a);
    s.b.push_back(splitmix64(state) % kMersenne61);
  }
  return s;
}

MinHashSignature minhash(const ShingleSet& set, const PermutationSeeds& seeds) {
  if (set.elements.empty()) throw Error(Errc::empty_document, "no shingles to sign");
  MinHashSignature sig;
  sig.values.assign(seeds.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t e : set.elements) {
    const std::uint64_t x = mod_mersenne(e);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto v = static_cast<u128>(seeds.a[i]) * x + seeds.b[i];
      sig.values[i] = std::min(sig.values[i], mod_mersenne(v));
    }
  }
  return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.num_perms() != b.num_perms()) {
    throw Error(Errc::signature_mismatch, std::to_string(a.num_perms()) + " vs " +
                                              std::to_string(b.num_perms()) + " permutations");
  }
  if (a.values.empty()) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) agree += a.values[i] == b.values[i];
  return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

LshIndex::LshIndex(std::size_t bands, std::size_t rows)
    : bands_(bands), rows_(rows), buckets_(bands) {
  if (bands == 0 || rows == 0) throw Error(Errc::config, "LSH bands and rows must be >= 1");
}

void LshIndex::insert(DocId id, const MinHashSignature& sig) {
  if (sig.num_perms() != bands_ * rows_) {
    throw Error(Errc::config, "signature length " + std::to_string(sig.num_perms()) +
                                  " != bands*rows " + std::to_string(bands_ * rows_));
  }
  for (std::size_t band = 0; band < bands_; ++band) {
    const auto* first = reinterpret_cast<const char*>(sig.values.data() + band * rows_);
    // Values are hashed through their in-memory bytes; bucket keys never
    // leave the process so byte order does not matter.
    const std::uint64_t key =
        fnv1a64(std::string_view(first, rows_ * sizeof(std::uint64_t)), mix64(band + 1));
    buckets_[band][key].push_back(id);
  }
}

std::size_t LshIndex::bucket_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& band : buckets_) {
    for (const auto& [key, ids] : band) n += ids.size();
  }
  return n;
}

std::vector<std::pair<DocId, DocId>> LshIndex::candidates() const {
  std::vector<std::pair<DocId, DocId>> pairs;
  for (const auto& band : buckets_) {
    for (const auto& [key, ids] : band) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          pairs.emplace_back(std::min(ids[i], ids[j]), std::max(ids[i], ids[j]));
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<std::pair<DocId, DocId>> lsh_candidates(const LshIndex& index) {
  return index.candidates();
}

DedupResult dedup_corpus(std::span<const std::string> docs, const DedupParams& params) {
  if (!(params.threshold > 0.0 && params.threshold <= 1.0)) {
    throw Error(Errc::config, "dedup threshold must be in (0, 1]");
  }
  if (params.bands * params.rows != params.num_perms) {
    throw Error(Errc::config, "bands * rows must equal the permutation count");
  }
  const std::size_t n = docs.size();
  DedupResult result;

  // Exact copies collapse onto their first occurrence before the LSH pass.
  std::vector<bool> alive(n, true);
  std::vector<DocId> first_copy(n);
  {
    std::unordered_map<std::string_view, DocId> first_seen;
    first_seen.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [it, inserted] = first_seen.emplace(docs[i], static_cast<DocId>(i));
      if (!inserted) {
        alive[i] = false;
        first_copy[i] = it->second;
        ++result.exact_duplicates;
      }
    }
  }

  std::vector<DocId> survivors;
  std::vector<DocId> slot(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) {
      slot[i] = static_cast<DocId>(survivors.size());
      survivors.push_back(static_cast<DocId>(i));
    }
  }

  const PermutationSeeds seeds = make_seeds(params.num_perms, params.hash_seed);
  std::vector<ShingleSet> sets(survivors.size());
  std::vector<MinHashSignature> sigs(survivors.size());
  parallel_for(survivors.size(), [&](std::size_t s) {
    sets[s] = shingles(docs[survivors[s]], params.shingle_k);
    if (!sets[s].elements.empty()) sigs[s] = minhash(sets[s], seeds);
    if (!params.exact_verify) sets[s] = ShingleSet{};
  });

  // Index ids are positions in `survivors`.
  LshIndex index(params.bands, params.rows);
  for (std::size_t s = 0; s < survivors.size(); ++s) {
    if (!sigs[s].values.empty()) index.insert(static_cast<DocId>(s), sigs[s]);
  }
  const auto pairs = index.candidates();
  result.candidate_pairs = pairs.size();

  UnionFind uf(survivors.size());
  for (const auto& [a, b] : pairs) {
    const double est = estimate_jaccard(sigs[a], sigs[b]);
    if (est >= params.review_low && est <= params.review_high) {
      result.review.push_back({survivors[a], survivors[b], est});
    }
    if (est <= params.threshold) continue;
    if (params.exact_verify && exact_jaccard(sets[a], sets[b]) <= params.threshold) continue;
    uf.unite(a, b);
  }

  // Representative per component: most codepoints, then lowest index.
  std::vector<std::size_t> lengths(survivors.size());
  parallel_for(survivors.size(),
               [&](std::size_t s) { lengths[s] = utf8::count_codepoints(docs[survivors[s]]); });
  std::unordered_map<DocId, DocId> rep;
  for (std::size_t s = 0; s < survivors.size(); ++s) {
    const DocId root = uf.find(static_cast<DocId>(s));
    const auto it = rep.find(root);
    if (it == rep.end() || lengths[s] > lengths[it->second]) rep[root] = static_cast<DocId>(s);
  }

  for (std::size_t s = 0; s < survivors.size(); ++s) {
    const DocId r = rep[uf.find(static_cast<DocId>(s))];
    if (r == s) {
      result.kept.push_back(survivors[s]);
    } else {
      result.decisions.push_back(
          {survivors[r], survivors[s], estimate_jaccard(sigs[s], sigs[r]), false});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) continue;
    const DocId s = slot[first_copy[i]];
    const DocId r = rep[uf.find(s)];
    const double est = r == s ? 1.0 : estimate_jaccard(sigs[s], sigs[r]);
    result.decisions.push_back({survivors[r], static_cast<DocId>(i), est, true});
  }
  std::sort(result.decisions.begin(), result.decisions.end(),
            [](const DedupDecision& x, const DedupDecision& y) { return x.removed < y.removed; });
  return result;
}

}  // namespace lrforge::dedup
