#ifndef ERWLAB_ERRORS_HPP
#define ERWLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace erwlab {

enum class errc {
  config,
  coord_overflow,
  fewer_than_two_renewals,
  undefined_weight,
  all_weights_zero,
  label_mismatch,
  budget_exceeded,
  invalid_bias_order,
  io,
  schema,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::config: return "CONFIG";
    case errc::coord_overflow: return "COORD_OVERFLOW";
    case errc::fewer_than_two_renewals: return "FEWER_THAN_TWO_RENEWALS";
    case errc::undefined_weight: return "UNDEFINED_WEIGHT";
    case errc::all_weights_zero: return "ALL_WEIGHTS_ZERO";
    case errc::label_mismatch: return "LABEL_MISMATCH";
    case errc::budget_exceeded: return "BUDGET_EXCEEDED";
    case errc::invalid_bias_order: return "INVALID_BIAS_ORDER";
    case errc::io: return "IO";
    case errc::schema: return "SCHEMA";
  }
  return "UNKNOWN";
}

struct error : std::runtime_error {
  errc code;
  error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
};

}  // namespace erwlab

#endif
