#include "cmpreg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace cmpreg {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& raw, double* out) {
  std::string s = trim(raw);
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return false;
  *out = v;
  return true;
}

// Character-level RFC 4180 reader; quoted fields may hold commas, escaped
// quotes and line breaks.
std::vector<std::vector<std::string>> read_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool row_started = false;

  auto end_field = [&]() {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&]() {
    end_field();
    records.push_back(std::move(row));
    row.clear();
    row_started = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw InputError("CSV: quote inside an unquoted field");
        }
        in_quotes = true;
        field_started = true;
        row_started = true;
        break;
      case ',':
        end_field();
        row_started = true;
        break;
      case '\r':
        break;  // handled by the following \n; lone \r treated as ignorable
      case '\n':
        if (row_started || field_started || !field.empty() || !row.empty()) {
          end_row();
        }
        break;
      default:
        field += c;
        field_started = true;
        row_started = true;
        break;
    }
  }
  if (in_quotes) throw InputError("CSV: unterminated quoted field");
  if (row_started || !field.empty() || !row.empty()) end_row();
  return records;
}

}  // namespace

const Column& Dataset::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw InputError("unknown column: " + name);
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Dataset load_csv(std::istream& in,
                 const std::vector<std::string>& force_categorical) {
  // Strip a UTF-8 BOM if present.
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
  }
  auto records = read_records(in);
  if (records.empty()) throw InputError("CSV: missing header row");
  const auto& header = records.front();
  if (header.size() == 1 && trim(header[0]).empty()) {
    throw InputError("CSV: missing header row");
  }
  if (records.size() < 2) throw InputError("CSV: no data rows");

  Dataset data;
  data.names.reserve(header.size());
  for (const auto& h : header) {
    std::string name = trim(h);
    if (name.empty()) throw InputError("CSV: empty column name in header");
    if (data.has_column(name)) {
      throw InputError("CSV: duplicate column name: " + name);
    }
    data.names.push_back(name);
  }
  data.n_rows = records.size() - 1;

  const std::size_t n_cols = data.names.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n_cols) {
      throw InputError("CSV: row " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, header " +
                       std::to_string(n_cols));
    }
  }
  for (const auto& name : force_categorical) {
    if (!data.has_column(name)) {
      throw InputError("`--categorical` names unknown column: " + name);
    }
  }

  data.columns.resize(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    Column& col = data.columns[c];
    bool forced = std::find(force_categorical.begin(), force_categorical.end(),
                            data.names[c]) != force_categorical.end();
    bool numeric = !forced;
    std::vector<double> parsed(data.n_rows);
    for (std::size_t r = 0; r < data.n_rows && numeric; ++r) {
      const std::string& cell = records[r + 1][c];
      if (trim(cell).empty()) {
        throw InputError("CSV: missing value at row " + std::to_string(r + 1) +
                         ", column " + data.names[c]);
      }
      numeric = parse_number(cell, &parsed[r]);
    }
    if (numeric) {
      col.type = Column::Type::numeric;
      col.values = std::move(parsed);
      col.all_integer =
          std::all_of(col.values.begin(), col.values.end(), [](double v) {
            return std::rint(v) == v && std::fabs(v) <= 9.007199254740992e15;
          });
    } else {
      col.type = Column::Type::categorical;
      col.codes.resize(data.n_rows);
      std::unordered_map<std::string, int> seen;
      for (std::size_t r = 0; r < data.n_rows; ++r) {
        std::string cell = trim(records[r + 1][c]);
        if (cell.empty()) {
          throw InputError("CSV: missing value at row " +
                           std::to_string(r + 1) + ", column " + data.names[c]);
        }
        auto it = seen.find(cell);
        if (it == seen.end()) {
          it = seen.emplace(cell, static_cast<int>(col.levels.size())).first;
          col.levels.push_back(cell);
        }
        col.codes[r] = it->second;
      }
    }
  }
  return data;
}

Dataset load_csv_file(const std::string& path,
                      const std::vector<std::string>& force_categorical) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file: " + path);
  return load_csv(in, force_categorical);
}

std::vector<Term> parse_terms(const std::string& terms) {
  std::vector<Term> out;
  std::string body = trim(terms);
  if (body.empty() || body == "1") return out;  // intercept-only

  auto parse_factor = [](const std::string& raw) {
    TermFactor f;
    std::string s = trim(raw);
    auto caret = s.find('^');
    if (caret != std::string::npos) {
      std::string power = trim(s.substr(caret + 1));
      try {
        std::size_t pos = 0;
        f.power = std::stoi(power, &pos);
        if (pos != power.size()) throw std::invalid_argument(power);
      } catch (const std::exception&) {
        throw InputError("terms: bad power in '" + raw + "'");
      }
      if (f.power < 1) throw InputError("terms: power must be >= 1");
      s = trim(s.substr(0, caret));
    }
    if (s.empty()) throw InputError("terms: empty factor name");
    if (s.find_first_of(",:^") != std::string::npos) {
      throw InputError("terms: bad factor name '" + s + "'");
    }
    f.name = s;
    return f;
  };

  std::stringstream ss(body);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    std::string t = trim(piece);
    if (t.empty()) throw InputError("terms: empty term");
    Term term;
    auto colon = t.find(':');
    if (colon == std::string::npos) {
      term.lhs = parse_factor(t);
    } else {
      std::string rhs = t.substr(colon + 1);
      if (rhs.find(':') != std::string::npos) {
        throw InputError("terms: at most two factors per interaction");
      }
      term.lhs = parse_factor(t.substr(0, colon));
      term.rhs = parse_factor(rhs);
    }
    out.push_back(std::move(term));
  }
  return out;
}

namespace {

struct Expansion {
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> names;
};

Expansion expand_factor(const Dataset& data, const TermFactor& f) {
  const Column& col = data.column(f.name);
  const auto n = static_cast<Eigen::Index>(data.n_rows);
  Expansion e;
  if (col.type == Column::Type::numeric) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = std::pow(col.values[static_cast<std::size_t>(i)], f.power);
    }
    e.cols.push_back(std::move(v));
    e.names.push_back(f.power == 1 ? f.name
                                   : f.name + "^" + std::to_string(f.power));
  } else {
    if (f.power != 1) {
      throw InputError("terms: cannot raise categorical column '" + f.name +
                       "' to a power");
    }
    // Treatment coding against the first level in file order.
    for (std::size_t lvl = 1; lvl < col.levels.size(); ++lvl) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = col.codes[static_cast<std::size_t>(i)] ==
                       static_cast<int>(lvl)
                   ? 1.0
                   : 0.0;
      }
      e.cols.push_back(std::move(v));
      e.names.push_back(f.name + "[" + col.levels[lvl] + "]");
    }
  }
  return e;
}

}  // namespace

Design build_design(const Dataset& data, const std::vector<Term>& terms) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> names;
  const auto n = static_cast<Eigen::Index>(data.n_rows);
  cols.push_back(Eigen::VectorXd::Ones(n));
  names.emplace_back("(intercept)");

  for (const Term& term : terms) {
    Expansion lhs = expand_factor(data, term.lhs);
    if (!term.rhs) {
      for (std::size_t i = 0; i < lhs.cols.size(); ++i) {
        cols.push_back(std::move(lhs.cols[i]));
        names.push_back(std::move(lhs.names[i]));
      }
      continue;
    }
    Expansion rhs = expand_factor(data, *term.rhs);
    for (std::size_t a = 0; a < lhs.cols.size(); ++a) {
      for (std::size_t b = 0; b < rhs.cols.size(); ++b) {
        cols.push_back(lhs.cols[a].cwiseProduct(rhs.cols[b]));
        names.push_back(lhs.names[a] + ":" + rhs.names[b]);
      }
    }
  }

  Design design;
  design.X.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    design.X.col(static_cast<Eigen::Index>(c)) = cols[c];
  }
  design.names = std::move(names);
  return design;
}

Eigen::VectorXd response_vector(const Dataset& data, const std::string& name) {
  const Column& col = data.column(name);
  if (col.type != Column::Type::numeric || !col.all_integer) {
    throw InputError("response column '" + name +
                     "' must hold nonnegative integer counts");
  }
  const auto n = static_cast<Eigen::Index>(data.n_rows);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = col.values[static_cast<std::size_t>(i)];
    if (v < 0.0) {
      throw InputError("response column '" + name +
                       "' must hold nonnegative integer counts");
    }
    y[i] = v;
  }
  return y;
}

}  // namespace cmpreg
