#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace proxyme {

/// Base of every error raised by the engine. `code()` is the stable,
/// machine-readable name that also travels in ProtocolError replies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define PROXYME_DEFINE_ERROR(Name)                         \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& detail)               \
        : Error(#Name, detail) {}                          \
  };

// session-core
PROXYME_DEFINE_ERROR(IllegalTransition)
PROXYME_DEFINE_ERROR(InvalidTrialPlan)
// adapters
PROXYME_DEFINE_ERROR(MalformedAudioStub)
PROXYME_DEFINE_ERROR(UnknownMode)
PROXYME_DEFINE_ERROR(EmptyText)
// mediation-pipeline
PROXYME_DEFINE_ERROR(MediationAborted)
PROXYME_DEFINE_ERROR(NoActiveMediation)
// streaming-scheduler
PROXYME_DEFINE_ERROR(InvalidStreamState)
// experiment-controller
PROXYME_DEFINE_ERROR(InsufficientScenarios)
PROXYME_DEFINE_ERROR(ValidationError)
PROXYME_DEFINE_ERROR(ParseError)
PROXYME_DEFINE_ERROR(DuplicateScenarioId)
// provenance-ledger
PROXYME_DEFINE_ERROR(UnknownSourceUtterance)
PROXYME_DEFINE_ERROR(RoundTripMismatch)
// gateway
PROXYME_DEFINE_ERROR(UnauthorizedRole)
PROXYME_DEFINE_ERROR(UnknownSession)
// cli / service
PROXYME_DEFINE_ERROR(ConfigError)
PROXYME_DEFINE_ERROR(BindError)
PROXYME_DEFINE_ERROR(NoLogsFound)

#undef PROXYME_DEFINE_ERROR

class SequenceGap : public Error {
 public:
  SequenceGap(std::int64_t expected, std::int64_t got)
      : Error("SequenceGap", "expected seq " + std::to_string(expected) +
                                 ", got " + std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::int64_t expected() const noexcept { return expected_; }
  std::int64_t got() const noexcept { return got_; }

 private:
  std::int64_t expected_;
  std::int64_t got_;
};

enum class StageKind { Stt, Llm, Tts };

/// A failure inside one pipeline stage, tagged with the stage it came from.
/// code() is one of StageTimeout, StageUnavailable, MalformedResponse, or the
/// code of the wrapped adapter error.
class StageError : public Error {
 public:
  StageError(std::string code, StageKind stage, const std::string& detail)
      : Error(std::move(code), detail), stage_(stage) {}

  StageKind stage() const noexcept { return stage_; }

 private:
  StageKind stage_;
};

}  // namespace proxyme
