#include "kkdre/error.hpp"

namespace kkdre {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyWaveform: return "EmptyWaveform";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::NonIntegerLength: return "NonIntegerLength";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidRolloff: return "InvalidRolloff";
    case Errc::TooShort: return "TooShort";
    case Errc::LengthNotDivisible: return "LengthNotDivisible";
    case Errc::EmptySymbols: return "EmptySymbols";
    case Errc::ToneAboveNyquist: return "ToneAboveNyquist";
    case Errc::ToneInsideSignalBand: return "ToneInsideSignalBand";
    case Errc::AllZeroWaveform: return "AllZeroWaveform";
    case Errc::InvalidEdge: return "InvalidEdge";
    case Errc::EvenTaps: return "EvenTaps";
    case Errc::ConfigInvariantViolated: return "ConfigInvariantViolated";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BandExceedsNyquist: return "BandExceedsNyquist";
    case Errc::NoSignalPower: return "NoSignalPower";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::NonPositiveMean: return "NonPositiveMean";
    case Errc::ExcessiveClipping: return "ExcessiveClipping";
    case Errc::RateTooLow: return "RateTooLow";
    case Errc::NoCorrelationPeak: return "NoCorrelationPeak";
    case Errc::Diverged: return "Diverged";
    case Errc::AllCandidatesFailed: return "AllCandidatesFailed";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

PipelineError::PipelineError(std::string stage, const Error& cause)
    : Error(cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

}  // namespace kkdre
