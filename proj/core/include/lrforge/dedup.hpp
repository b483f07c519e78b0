#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lrforge::dedup {

using DocId = std::uint32_t;

struct ShingleSet {
  std::size_t k = 0;
  std::vector<std::uint64_t> elements;  // sorted, distinct
};

// One hash per distinct k-word window of the whitespace-split text. Texts
// with fewer than k words yield a single hash of the whole text; texts with
// no words at all yield an empty set.
ShingleSet shingles(std::string_view text, std::size_t k);

double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

// Universal hash family h_i(x) = (a_i * x + b_i) mod (2^61 - 1).
struct PermutationSeeds {
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;

  std::size_t size() const noexcept { return a.size(); }
};

inline constexpr std::uint64_t kDefaultHashSeed = 0x5eed'1f0a'2024'0001ULL;

PermutationSeeds make_seeds(std::size_t num_perms, std::uint64_t seed = kDefaultHashSeed);

struct MinHashSignature {
  std::vector<std::uint64_t> values;

  std::size_t num_perms() const noexcept { return values.size(); }
  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

// Throws Errc::empty_document on an empty set.
MinHashSignature minhash(const ShingleSet& set, const PermutationSeeds& seeds);

// Fraction of agreeing positions. Throws Errc::signature_mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

class LshIndex {
 public:
  // Throws Errc::config unless bands * rows == num_perms of every insert.
  LshIndex(std::size_t bands, std::size_t rows);

  void insert(DocId id, const MinHashSignature& sig);

  // Pairs (lo, hi) sharing at least one band bucket, sorted, no duplicates.
  std::vector<std::pair<DocId, DocId>> candidates() const;

  std::size_t bands() const noexcept { return bands_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t bucket_entries() const noexcept;

 private:
  std::size_t bands_;
  std::size_t rows_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<DocId>>> buckets_;
};

std::vector<std::pair<DocId, DocId>> lsh_candidates(const LshIndex& index);

struct DedupParams {
  double threshold = 0.90;
  std::size_t num_perms = 128;
  std::size_t bands = 16;
  std::size_t rows = 8;
  std::size_t shingle_k = 5;
  std::uint64_t hash_seed = kDefaultHashSeed;
  // Recompute exact shingle Jaccard on candidates before linking them.
  bool exact_verify = false;
  // Estimated-similarity window reported for manual review.
  double review_low = 0.80;
  double review_high = 0.92;
};

struct DedupDecision {
  DocId kept;
  DocId removed;
  double est_jaccard;  // estimate between removed and kept; 1.0 for exact copies
  bool exact = false;
};

struct ReviewPair {
  DocId a;
  DocId b;
  double est_jaccard;
};

struct DedupResult {
  std::vector<DocId> kept;  // ascending original indices
  std::vector<DedupDecision> decisions;
  std::vector<ReviewPair> review;
  std::size_t exact_duplicates = 0;
  std::size_t candidate_pairs = 0;
};

// Exact byte-identical copies go first; then near-duplicate components are
// formed over LSH candidates whose estimate exceeds the threshold and each
// component keeps its longest document (ties: lowest index).
DedupResult dedup_corpus(std::span<const std::string> docs, const DedupParams& params = {});

}  // namespace lrforge::dedup
