#include "lrforge/error.hpp"

namespace lrforge {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::config: return "ConfigError";
    case Errc::io: return "IoError";
    case Errc::data: return "DataError";
    case Errc::empty_document: return "EmptyDocument";
    case Errc::signature_mismatch: return "SignatureMismatch";
    case Errc::corpus_too_small: return "CorpusTooSmall";
    case Errc::unknown_id: return "UnknownId";
    case Errc::malformed_vocab_file: return "MalformedVocabFile";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::bad_header: return "BadHeader";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::document_exceeds_shard: return "DocumentExceedsShard";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::template_slot_mismatch: return "TemplateSlotMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::missing_run: return "MissingRun";
  }
  return "Error";
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::config:
    case Errc::template_slot_mismatch:
      return 1;
    case Errc::io:
    case Errc::missing_run:
      return 2;
    default:
      return 3;
  }
}

}  // namespace lrforge
