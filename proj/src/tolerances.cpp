#include "qtp/tolerances.hpp"

#include <stdexcept>
#include <string>

namespace qtp {

namespace {
Tolerances& active() {
  static Tolerances t = Tolerances::defaults();
  return t;
}
}  // namespace

const Tolerances& tolerances() { return active(); }

void set_tolerances(const Tolerances& t) { active() = t; }

void set_tolerance_profile(std::string_view name) {
  if (name == "default")
    active() = Tolerances::defaults();
  else if (name == "strict")
    active() = Tolerances::strict();
  else
    throw std::invalid_argument("unknown tolerance profile '" + std::string(name) +
                                "' (expected default or strict)");
}

}  // namespace qtp
