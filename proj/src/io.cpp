#include "mgrisk/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "mgrisk/errors.hpp"

namespace mgrisk {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(where + ": '" + text + "' is not a number");
  return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string values_csv(const ValueTable& table) {
  std::ostringstream out;
  out << "t,s,J,b_opt\n";
  const auto& grid = table.grid;
  if (table.horizon() == 0) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << 1 << ',' << format_number(grid.at(i)) << ',' << format_number(table.cost_to_go[0][i])
          << ",\n";
    return out.str();
  }
  for (std::size_t t = 0; t < table.horizon(); ++t)
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << t + 1 << ',' << format_number(grid.at(i)) << ','
          << format_number(table.cost_to_go[t][i]) << ',' << format_number(table.policy[t][i])
          << '\n';
  return out.str();
}

ValueTable read_values_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "t,s,J,b_opt")
    throw ValidationError(path.string() + ": expected header 't,s,J,b_opt'");

  struct Row {
    std::vector<double> s, j, b;
    bool has_policy = true;
  };
  std::map<long, Row> stages;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = path.string() + ":" + std::to_string(k + 1);
    const auto f = split(lines[k], ',');
    if (f.size() != 4) throw ValidationError(where + ": expected 4 columns");
    const double t = parse_number(f[0], where);
    if (t < 1 || t != static_cast<double>(static_cast<long>(t)))
      throw ValidationError(where + ": stage index must be a positive integer");
    Row& row = stages[static_cast<long>(t)];
    row.s.push_back(parse_number(f[1], where));
    row.j.push_back(parse_number(f[2], where));
    if (f[3].empty())
      row.has_policy = false;
    else
      row.b.push_back(parse_number(f[3], where));
  }
  if (stages.empty()) throw ValidationError(path.string() + ": no value rows");

  const Row& first = stages.begin()->second;
  const std::size_t n = first.s.size();
  if (n < 2) throw ValidationError(path.string() + ": need at least 2 states per stage");
  ValueTable table{StateGrid(first.s.front(), first.s.back(), static_cast<int>(n)), {}, {}};
  long expected = 1;
  for (const auto& [t, row] : stages) {
    if (t != expected) throw ValidationError(path.string() + ": stage " + std::to_string(expected) + " missing");
    ++expected;
    if (row.s.size() != n) throw ValidationError(path.string() + ": ragged stage " + std::to_string(t));
    for (std::size_t i = 0; i < n; ++i)
      if (row.s[i] != table.grid.at(i))
        throw ValidationError(path.string() + ": stage " + std::to_string(t) +
                              " states are not the uniform grid");
    table.cost_to_go.push_back(row.j);
    if (row.has_policy) {
      if (row.b.size() != n) throw ValidationError(path.string() + ": incomplete policy at stage " + std::to_string(t));
      table.policy.push_back(row.b);
    }
  }
  if (table.policy.empty()) {
    // Zero horizon: the single row is the terminal one.
    if (stages.size() != 1) throw ValidationError(path.string() + ": missing policy columns");
    return table;
  }
  if (table.policy.size() != table.cost_to_go.size())
    throw ValidationError(path.string() + ": every stage row needs b_opt");
  table.cost_to_go.emplace_back(n, 0.0);
  return table;
}

std::string trace_csv(const DispatchTrace& trace) {
  std::ostringstream out;
  out << "t,s,b,n,n_tilde,p,shed,curtail,n_tilde_baseline\n";
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& st = trace.steps[t];
    out << t + 1 << ',' << format_number(st.state) << ',' << format_number(st.rate) << ','
        << format_number(st.net_load) << ',' << format_number(st.intervention) << ','
        << format_number(st.flow) << ',' << format_number(std::max(st.intervention, 0.0)) << ','
        << format_number(std::max(-st.intervention, 0.0)) << ','
        << format_number(st.baseline_intervention) << '\n';
  }
  return out.str();
}

std::string comparison_csv(const DispatchTrace& trace) {
  std::ostringstream out;
  out << "t,n_tilde_with,n_tilde_without\n";
  for (std::size_t t = 0; t < trace.steps.size(); ++t)
    out << t + 1 << ',' << format_number(trace.steps[t].intervention) << ','
        << format_number(trace.steps[t].baseline_intervention) << '\n';
  return out.str();
}

std::vector<double> read_realization_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "n")
    throw ValidationError(path.string() + ": expected a single column with header 'n'");
  std::vector<double> out;
  for (std::size_t k = 1; k < lines.size(); ++k)
    out.push_back(parse_number(lines[k], path.string() + ":" + std::to_string(k + 1)));
  return out;
}

}  // namespace mgrisk
