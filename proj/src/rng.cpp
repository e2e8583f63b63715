#include "rumorlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "rumorlab/error.hpp"

namespace rumorlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInconsistentCounts: return "InconsistentCounts";
    case ErrorCode::kDisconnectedTypes: return "DisconnectedTypes";
    case ErrorCode::kZeroDegreeType: return "ZeroDegreeType";
    case ErrorCode::kSizeTooSmall: return "SizeTooSmall";
    case ErrorCode::kOddGridDimension: return "OddGridDimension";
    case ErrorCode::kInfeasibleSize: return "InfeasibleSize";
    case ErrorCode::kMatchingFailed: return "MatchingFailed";
    case ErrorCode::kTableTooShort: return "TableTooShort";
    case ErrorCode::kProportionRoundingImpossible: return "ProportionRoundingImpossible";
    case ErrorCode::kTooManyVertices: return "TooManyVertices";
    case ErrorCode::kNonExponentialLaw: return "NonExponentialLaw";
    case ErrorCode::kFixedPointDiverged: return "FixedPointDiverged";
    case ErrorCode::kTimesOutsideGrid: return "TimesOutsideGrid";
    case ErrorCode::kNotPsdAfterRidge: return "NotPSDAfterRidge";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
  }
  return "Unknown";
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection; unbiased.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::exponential(double rate) { return -std::log(uniform_open0()) / rate; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller.
  const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace rumorlab
