#include "cyclored/error.hpp"

namespace cyclored {

std::string_view to_string(ErrorCode code) {
   switch(code) {
      case ErrorCode::NotAResidue: return "NotAResidue";
      case ErrorCode::NotPrime: return "NotPrime";
      case ErrorCode::LimitTooLarge: return "LimitTooLarge";
      case ErrorCode::BadReduction: return "BadReduction";
      case ErrorCode::BadWitness: return "BadWitness";
      case ErrorCode::IterationCap: return "IterationCap";
      case ErrorCode::CheckpointCorrupt: return "CheckpointCorrupt";
      case ErrorCode::MissingDegree: return "MissingDegree";
      case ErrorCode::ProfileLeak: return "ProfileLeak";
      case ErrorCode::DegreeOne: return "DegreeOne";
      case ErrorCode::Indeterminate: return "Indeterminate";
      case ErrorCode::InvalidPrime: return "InvalidPrime";
      case ErrorCode::InvalidArgument: return "InvalidArgument";
      case ErrorCode::ClosureCapExceeded: return "ClosureCapExceeded";
      case ErrorCode::NotOrderTwo: return "NotOrderTwo";
      case ErrorCode::NotCentral: return "NotCentral";
      case ErrorCode::CharacterNotSurjective: return "CharacterNotSurjective";
      case ErrorCode::FixtureMissing: return "FixtureMissing";
      case ErrorCode::SchemaMismatch: return "SchemaMismatch";
      case ErrorCode::RemoteDisabled: return "RemoteDisabled";
      case ErrorCode::Io: return "Io";
   }
   return "Unknown";
}

}  // namespace cyclored
