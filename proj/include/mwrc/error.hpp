#pragma once

#include <stdexcept>
#include <string>

namespace mwrc {

// Stable error identifiers. The CLI maps any thrown Error to exit code 2 and
// prints name(code) so scripts can match on the identifier.
enum class Errc {
  negative_probability,
  sum_not_one,
  shape_mismatch,
  empty_subset,
  overlapping_subsets,
  singular_system,
  weight_out_of_range,
  parameter_out_of_range,
  division_by_zero,
  degenerate_channel,
  symbol_out_of_field,
  index_out_of_range,
  tractability_exceeded,
  parse_error,
};

inline const char* name(Errc c) {
  switch (c) {
    case Errc::negative_probability: return "NegativeProbability";
    case Errc::sum_not_one: return "SumNotOne";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_subset: return "EmptySubset";
    case Errc::overlapping_subsets: return "OverlappingSubsets";
    case Errc::singular_system: return "SingularSystem";
    case Errc::weight_out_of_range: return "WeightOutOfRange";
    case Errc::parameter_out_of_range: return "ParameterOutOfRange";
    case Errc::division_by_zero: return "DivisionByZero";
    case Errc::degenerate_channel: return "DegenerateChannel";
    case Errc::symbol_out_of_field: return "SymbolOutOfField";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::tractability_exceeded: return "TractabilityExceeded";
    case Errc::parse_error: return "ParseError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Errc code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mwrc
