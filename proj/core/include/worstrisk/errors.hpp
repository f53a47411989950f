#pragma once

#include <stdexcept>
#include <string>

namespace worstrisk {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridMismatch : Error { using Error::Error; };
struct InvalidThreshold : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NearSingularMultiplier : Error { using Error::Error; };
struct EmptyPanel : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct InvalidGamma : Error { using Error::Error; };
struct DegenerateFamily : Error { using Error::Error; };
struct DegenerateCovariates : Error { using Error::Error; };
struct SingularGram : Error { using Error::Error; };
struct InvalidTruncation : Error { using Error::Error; };
struct DegenerateDenominator : Error { using Error::Error; };
struct SplitViolation : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace worstrisk
