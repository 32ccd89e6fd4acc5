#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace qseg::cli {

/// Exit codes: 0 success, 1 domain or I/O error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `lo:hi:n` or `lo:hi:n:log`, n odd and ≥ 3, values rounded to integers.
std::vector<std::int64_t> parse_grid(std::string_view text);

/// QSEG_SEED value when set; throws InvalidArgument when it is not an unsigned integer.
std::optional<std::uint64_t> env_seed();

}  // namespace qseg::cli
