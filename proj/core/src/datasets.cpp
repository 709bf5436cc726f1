#include "gosta/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "gosta/error.hpp"

namespace gosta {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(const std::string& field) {
  const std::string f = trim(field);
  double v = 0.0;
  const char* first = f.data();
  if (!f.empty() && f.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) return std::nullopt;
  return v;
}

std::size_t resolve_column(const std::string& key, const std::vector<std::string>& header, std::size_t width) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == key) return c;
  }
  if (auto idx = to_number(key); idx && *idx >= 1 && *idx <= static_cast<double>(width) && std::floor(*idx) == *idx) {
    return static_cast<std::size_t>(*idx) - 1;
  }
  throw Error(ErrorKind::missing_input, "CSV column '" + key + "' not found");
}

std::size_t parse_size(const std::string& s, const std::string& spec) {
  const auto v = to_number(s);
  if (!v || *v < 0 || std::floor(*v) != *v) throw Error(ErrorKind::parse_error, "bad integer '" + s + "' in data spec '" + spec + "'");
  return static_cast<std::size_t>(*v);
}

double parse_real(const std::string& s, const std::string& spec) {
  const auto v = to_number(s);
  if (!v) throw Error(ErrorKind::parse_error, "bad number '" + s + "' in data spec '" + spec + "'");
  return *v;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::file_not_found, "data file not found: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split(line, ','));
  }
  if (rows.empty()) throw Error(ErrorKind::invalid_data, "data file is empty: " + path.string());

  std::vector<std::string> header;
  bool has_header = false;
  for (const auto& f : rows.front()) has_header = has_header || !to_number(f);
  if (has_header) {
    header = rows.front();
    rows.erase(rows.begin());
  }
  if (rows.empty()) throw Error(ErrorKind::invalid_data, "data file has no observations: " + path.string());
  const std::size_t width = rows.front().size();

  std::optional<std::size_t> label_col, cell_col;
  if (opts.label_column) label_col = resolve_column(*opts.label_column, header, width);
  if (opts.partition_column) cell_col = resolve_column(*opts.partition_column, header, width);
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != label_col && c != cell_col) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw Error(ErrorKind::invalid_data, "data file has no feature columns");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  std::vector<int> labels, cells;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + ":" + std::to_string(r + 1 + (has_header ? 1 : 0));
    if (row.size() != width) {
      throw Error(ErrorKind::parse_error, where + ": expected " + std::to_string(width) + " fields, got " +
                                              std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      const auto v = to_number(row[feature_cols[c]]);
      if (!v) throw Error(ErrorKind::parse_error, where + ": non-numeric field '" + row[feature_cols[c]] + "'");
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
    if (label_col) {
      const auto v = to_number(row[*label_col]);
      if (!v || (*v != 1.0 && *v != -1.0)) throw Error(ErrorKind::invalid_data, where + ": labels must be -1 or +1");
      labels.push_back(static_cast<int>(*v));
    }
    if (cell_col) {
      const auto v = to_number(row[*cell_col]);
      if (!v || *v < 1.0 || std::floor(*v) != *v) {
        throw Error(ErrorKind::invalid_data, where + ": partition cells must be integers >= 1");
      }
      cells.push_back(static_cast<int>(*v));
    }
  }
  Dataset data{DesignMatrix(std::move(x)), std::nullopt, std::nullopt};
  if (label_col) data.labels = std::move(labels);
  if (cell_col) data.partition = Partition{std::move(cells)};
  return data;
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  const auto& x = data.design.matrix();
  for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << "x" << c + 1;
  if (data.labels) out << ",label";
  if (data.partition) out << ",cell";
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << x(r, c);
    if (data.labels) out << ',' << (*data.labels)[static_cast<std::size_t>(r)];
    if (data.partition) out << ',' << data.partition->assignment[static_cast<std::size_t>(r)];
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io_error, "failed writing " + path.string());
}

Dataset synth_gaussian_mixture(std::size_t n, std::size_t d, std::size_t k, double separation, Rng& rng) {
  if (k < 1 || n < k || n < 2) throw Error(ErrorKind::invalid_parameter, "mixture needs n >= k >= 1 and n >= 2");
  if (d < 1) throw Error(ErrorKind::invalid_parameter, "mixture needs d >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw Error(ErrorKind::invalid_parameter, "mixture separation must be finite and non-negative");
  }
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), dd);
  for (std::size_t c = 0; c < k; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    if (d == 1) {
      centers(ci, 0) = separation * static_cast<double>(c);
    } else if (k > 1) {
      const double radius = separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(k)));
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
      centers(ci, 0) = radius * std::cos(angle);
      centers(ci, 1) = radius * std::sin(angle);
    }
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), dd);
  std::vector<int> cells;
  cells.reserve(n);
  const std::size_t base = n / k, extra = n % k;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t size = base + (c < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) cells.push_back(static_cast<int>(c + 1));
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto c = static_cast<Eigen::Index>(cells[static_cast<std::size_t>(r)] - 1);
    for (Eigen::Index j = 0; j < dd; ++j) x(r, j) = centers(c, j) + noise(rng);
  }
  return Dataset{DesignMatrix(std::move(x)), std::nullopt, Partition{std::move(cells)}};
}

Dataset synth_two_class(std::size_t n, std::size_t d, double margin, Rng& rng) {
  if (n < 2) throw Error(ErrorKind::invalid_parameter, "two-class data needs n >= 2");
  if (d < 1) throw Error(ErrorKind::invalid_parameter, "two-class data needs d >= 1");
  if (!std::isfinite(margin)) throw Error(ErrorKind::invalid_parameter, "margin must be finite");
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    labels[r] = r % 2 == 0 ? 1 : -1;
    const auto ri = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(ri, j) = noise(rng);
    x(ri, 0) += 0.5 * margin * labels[r];
  }
  return Dataset{DesignMatrix(std::move(x)), std::move(labels), std::nullopt};
}

Dataset dataset_from_spec(const std::string& spec, const CsvOptions& csv, std::uint64_t fallback_seed) {
  const auto parts = split(spec, ':');
  if (!parts.empty() && parts[0] == "mixture" && (parts.size() == 5 || parts.size() == 6)) {
    Rng rng(parts.size() == 6 ? parse_size(parts[5], spec) : fallback_seed);
    return synth_gaussian_mixture(parse_size(parts[1], spec), parse_size(parts[2], spec), parse_size(parts[3], spec),
                                  parse_real(parts[4], spec), rng);
  }
  if (!parts.empty() && parts[0] == "twoclass" && (parts.size() == 4 || parts.size() == 5)) {
    Rng rng(parts.size() == 5 ? parse_size(parts[4], spec) : fallback_seed);
    return synth_two_class(parse_size(parts[1], spec), parse_size(parts[2], spec), parse_real(parts[3], spec), rng);
  }
  if (!parts.empty() && (parts[0] == "mixture" || parts[0] == "twoclass")) {
    throw Error(ErrorKind::parse_error,
                "bad data spec '" + spec + "' (expected mixture:N:D:K:SEP[:SEED] or twoclass:N:D:MARGIN[:SEED])");
  }
  return load_csv(spec, csv);
}

}  // namespace gosta
