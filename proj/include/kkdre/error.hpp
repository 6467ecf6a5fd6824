#pragma once

#include <stdexcept>
#include <string>

namespace kkdre {

enum class Errc {
  EmptyWaveform,
  NonPositiveRate,
  NonIntegerLength,
  InvalidArgument,
  InvalidRolloff,
  TooShort,
  LengthNotDivisible,
  EmptySymbols,
  ToneAboveNyquist,
  ToneInsideSignalBand,
  AllZeroWaveform,
  InvalidEdge,
  EvenTaps,
  ConfigInvariantViolated,
  LengthMismatch,
  BandExceedsNyquist,
  NoSignalPower,
  ConstantInput,
  NonPositiveMean,
  ExcessiveClipping,
  RateTooLow,
  NoCorrelationPeak,
  Diverged,
  AllCandidatesFailed,
  DegenerateVariance,
  InvalidConfig,
  EmptyInput,
  IoFailure,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the end-to-end chain; names the stage that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Runs fn, re-raising a plain Error as a PipelineError tagged with stage.
template <typename F>
auto with_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(stage, e);
  }
}

}  // namespace kkdre
