#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmue/gamp.hpp"
#include "mmue/instance.hpp"

namespace mmue::io {

/// Plain comma-separated table preceded by "# key=value" header lines.
/// Fields never contain commas or quotes, so no quoting is done.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string* find_meta(const std::string& key) const;
  const std::string& meta_value(const std::string& key) const;  // throws ParseError if absent
  std::size_t column(const std::string& name) const;            // throws ParseError if absent
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path, bool has_column_header = true);

/// Round-trip formatting of doubles.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v, const std::string& name,
                  const std::vector<std::pair<std::string, std::string>>& meta = {});
Eigen::VectorXd read_vector(const std::filesystem::path& path, const std::string& name);

/// Matrix file: header lines (rows, cols, extra metadata) then one CSV row per matrix row.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::vector<std::pair<std::string, std::string>>& meta = {});
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// Instance directory: x.csv, w.csv, y.csv, phi.csv. Prior, channel and seed
/// live in the phi.csv header.
void save_instance(const std::filesystem::path& dir, const ProblemInstance& instance);
ProblemInstance load_instance(const std::filesystem::path& dir);

/// Columns index, q, x_mmse, x_var; header carries mu, iterations_run and the
/// mu trajectory (semicolon separated).
void write_gamp_result(const std::filesystem::path& path, const ScalarChannelResult& result);
ScalarChannelResult read_gamp_result(const std::filesystem::path& path);

/// Columns index, estimate.
void write_estimate(const std::filesystem::path& path, const Eigen::VectorXd& estimate,
                    const std::vector<std::pair<std::string, std::string>>& meta = {});

std::vector<std::pair<std::string, std::string>> prior_meta(const SignalPrior& prior);
SignalPrior prior_from_meta(const CsvTable& table);
std::vector<std::pair<std::string, std::string>> channel_meta(const OutputChannel& channel);
OutputChannel channel_from_meta(const CsvTable& table);

}  // namespace mmue::io
