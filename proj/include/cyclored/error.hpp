#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclored {

enum class ErrorCode {
   NotAResidue,
   NotPrime,
   LimitTooLarge,
   BadReduction,
   BadWitness,
   IterationCap,
   CheckpointCorrupt,
   MissingDegree,
   ProfileLeak,
   DegreeOne,
   Indeterminate,
   InvalidPrime,
   InvalidArgument,
   ClosureCapExceeded,
   NotOrderTwo,
   NotCentral,
   CharacterNotSurjective,
   FixtureMissing,
   SchemaMismatch,
   RemoteDisabled,
   Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
   public:
      Error(ErrorCode code, const std::string& what) :
            std::runtime_error(std::string(to_string(code)) + ": " + what), m_code(code) {}

      ErrorCode code() const noexcept { return m_code; }

   private:
      ErrorCode m_code;
};

}  // namespace cyclored
