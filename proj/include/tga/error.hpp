#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tga {

// Every failure the engine can raise. Validation findings are data
// (ValidationReport), not errors, and do not appear here.
enum class ErrorCode {
  // behavior-code grammar
  UnknownActorPrefix,
  BadSuffixForActor,
  MalformedCode,
  // session ingest
  MissingMeta,
  MissingScene,
  DuplicateMeta,
  DuplicateScene,
  MalformedRecord,
  ZeroGazeDirection,
  TimestampOutOfRange,
  // sidecars
  IndexOutOfRange,
  DuplicateIndex,
  MalformedSidecar,
  // discourse
  MalformedLexicon,
  PerplexityTooLarge,
  DimensionMismatch,
  TooFewPoints,
  // sequence
  EmptyMatrix,
  // gaze
  ZeroTotalDwell,
  TooFewStudents,
  // report
  NothingToReport,
  BadMetricPath,
  MalformedRules,
  // synth
  InvalidStochasticMatrix,
  MalformedConfig,
  // io
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tga
