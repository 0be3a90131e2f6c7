#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hstab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitOracleLimit = 4;

/// "%.12g"; non-finite values print as nan, inf, -inf.
std::string format_number(double v);

/// Round every float in `j` to 12 significant digits (recursively).
nlohmann::json round_floats(const nlohmann::json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

/// Parse argv, run one command and write its output to `out` (or the file
/// given by --output). Diagnostics and wall time go to `err`. Returns one of
/// the kExit* codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience wrapper: argv[0] is supplied.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hstab::cli
