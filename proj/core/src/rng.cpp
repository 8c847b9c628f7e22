#include "overtake/rng.hpp"

#include <sstream>

#include "overtake/error.hpp"

namespace overtake {

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::set_state(const std::string& text) {
  std::istringstream in(text);
  in >> engine_;
  if (in.fail()) throw FormatError("malformed rng state");
}

}  // namespace overtake
