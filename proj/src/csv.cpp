#include "evimmd/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "evimmd/error.hpp"

namespace evimmd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_real(std::string_view token, double& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

// Strips a UTF-8 byte-order mark from the first line.
void strip_bom(std::string& line) {
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1, 0);
  strip_bom(line);

  // Map header columns to output dimensions; skip the particle bookkeeping.
  const auto header = split_fields(line);
  std::vector<int> dim_of_column(header.size(), -1);
  std::size_t dim = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = trim(header[c]);
    if (name == "iter" || name == "particle_id") continue;
    if (name != "dim_" + std::to_string(dim)) {
      throw ParseError(path.string() + ": expected header column dim_" +
                           std::to_string(dim) + ", found '" + std::string(name) + "'",
                       1, c + 1);
    }
    dim_of_column[c] = static_cast<int>(dim++);
  }
  if (dim == 0) throw ParseError(path.string() + ": header has no dim_ columns", 1, 0);

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       line_no, 0);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (dim_of_column[c] < 0) continue;
      double v = 0.0;
      if (!parse_real(fields[c], v)) {
        throw ParseError(path.string() + ": row " + std::to_string(line_no) +
                             ": not a real number: '" + std::string(trim(fields[c])) + "'",
                         line_no, c + 1);
      }
      if (!std::isfinite(v)) {
        throw ParseError(path.string() + ": row " + std::to_string(line_no) +
                             ": non-finite value",
                         line_no, c + 1);
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no data rows", line_no, 0);
  return Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(dim));
}

EmpiricalTarget load_dataset_csv(const std::filesystem::path& path,
                                 std::size_t minibatch_size) {
  Matrix data = read_matrix_csv(path);
  const std::size_t m = static_cast<std::size_t>(data.rows());
  return EmpiricalTarget(std::move(data), minibatch_size == 0 ? m : minibatch_size);
}

void write_particles(const ParticleSet& particles, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  const Matrix& x = particles.positions();
  out << "iter,particle_id";
  for (Eigen::Index k = 0; k < x.cols(); ++k) out << ",dim_" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out << particles.iteration() << ',' << i;
    for (Eigen::Index k = 0; k < x.cols(); ++k) out << ',' << format_real(x(i, k));
    out << '\n';
  }
  finish(out, path);
}

void write_matrix_csv(const Matrix& points, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (Eigen::Index k = 0; k < points.cols(); ++k) out << (k ? ",dim_" : "dim_") << k;
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      if (k) out << ',';
      out << format_real(points(i, k));
    }
    out << '\n';
  }
  finish(out, path);
}

void write_run_record(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << kRunRecordHeader << '\n';
  for (const RunRow& r : record.rows()) {
    out << r.iteration << ',' << format_real(r.bandwidth) << ','
        << format_real(r.free_energy) << ',' << format_real(r.mmd2_eval) << ','
        << format_real(r.energy_distance_eval) << ',' << r.inner_iterations << ','
        << format_real(r.displacement) << '\n';
  }
  finish(out, path);
}

RunRecord read_run_record(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kRunRecordHeader) {
    throw ParseError(path.string() + ": missing run-record header", 1, 0);
  }
  RunRecord record;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    auto bad = [&](std::size_t column) {
      return ParseError(path.string() + ": malformed row " + std::to_string(line_no),
                        line_no, column);
    };
    if (f.size() != 7) throw bad(0);
    RunRow row;
    double iter = 0.0;
    double inner = 0.0;
    if (!parse_real(f[0], iter) || !parse_real(f[1], row.bandwidth) ||
        !parse_real(f[2], row.free_energy) || !parse_real(f[3], row.mmd2_eval) ||
        !parse_real(f[4], row.energy_distance_eval) || !parse_real(f[5], inner) ||
        !parse_real(f[6], row.displacement)) {
      throw bad(0);
    }
    if (!(iter >= 0.0) || !(inner >= 0.0)) throw bad(0);
    row.iteration = static_cast<std::size_t>(iter);
    row.inner_iterations = static_cast<std::size_t>(inner);
    try {
      record.append(row);
    } catch (const InvalidArgument&) {
      throw bad(1);
    }
  }
  return record;
}

}  // namespace evimmd
