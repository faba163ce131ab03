#pragma once

#include <ostream>

#include <json.hpp>

namespace mmalign {

// Line-delimited JSON diagnostics.  A null stream drops all records, so
// library code can emit unconditionally.
class Diag {
 public:
  Diag() = default;
  explicit Diag(std::ostream* out) : out_(out) {}

  void emit(const nlohmann::json& record) {
    if (out_ != nullptr) {
      *out_ << record.dump() << '\n' << std::flush;
    }
  }

 private:
  std::ostream* out_ = nullptr;
};

}  // namespace mmalign
