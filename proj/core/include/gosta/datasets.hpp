#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gosta/kernels.hpp"
#include "gosta/rng.hpp"

namespace gosta {

struct CsvOptions {
  /// Column holding -1/+1 labels, by header name or 1-based index.
  std::optional<std::string> label_column;
  /// Column holding partition cells (integers >= 1), same addressing.
  std::optional<std::string> partition_column;
};

/// Numeric CSV, one observation per row. A first row containing any
/// non-numeric field is treated as a header.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Writes x1..xd, then `label` and `cell` columns when present.
void save_csv(const std::filesystem::path& path, const Dataset& data);

/// K unit-variance spherical Gaussian clusters. Centers sit on a circle in
/// the first two coordinates (on a line when d = 1) with neighbouring
/// centers `separation` apart. Rows are grouped by cell; sizes differ by at
/// most one, larger cells first.
Dataset synth_gaussian_mixture(std::size_t n, std::size_t d, std::size_t k, double separation, Rng& rng);

/// Two unit-variance Gaussian classes whose means differ by `margin` along
/// the first axis. Labels alternate +1, -1.
Dataset synth_two_class(std::size_t n, std::size_t d, double margin, Rng& rng);

/// mixture:N:D:K:SEP[:SEED], twoclass:N:D:MARGIN[:SEED], or a CSV path.
Dataset dataset_from_spec(const std::string& spec, const CsvOptions& csv = {}, std::uint64_t fallback_seed = 1);

}  // namespace gosta
