#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrforge {

// Error conditions surfaced by the library. Each maps onto one of the three
// process exit codes used by the command-line front-end.
enum class Errc {
  config,  // generic configuration problem
  io,      // generic filesystem problem
  data,    // generic malformed-input problem

  empty_document,
  signature_mismatch,
  corpus_too_small,
  unknown_id,
  malformed_vocab_file,
  empty_corpus,
  bad_header,
  malformed_row,
  document_exceeds_shard,
  out_of_range,
  template_slot_mismatch,
  length_mismatch,
  empty_reference,
  missing_run,
};

std::string_view errc_name(Errc code) noexcept;

// 1 = config, 2 = io, 3 = data.
int exit_code_for(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  Errc code() const noexcept { return code_; }
  // The message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }
  int exit_code() const noexcept { return exit_code_for(code_); }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace lrforge
