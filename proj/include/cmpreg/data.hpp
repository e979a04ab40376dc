#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmpreg {

// Anything wrong with user-supplied input: malformed CSV, unknown column,
// bad term syntax, non-count response.  Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Column {
  enum class Type { numeric, categorical };
  Type type = Type::numeric;
  std::vector<double> values;        // numeric columns
  std::vector<int> codes;            // categorical: index into levels
  std::vector<std::string> levels;   // in order of first appearance
  bool all_integer = false;
};

struct Dataset {
  std::vector<std::string> names;
  std::vector<Column> columns;
  std::size_t n_rows = 0;

  const Column& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

// RFC 4180 CSV with a mandatory header row; quoted fields may contain
// commas, quotes and newlines.  A column is numeric when every cell parses
// as a number, categorical otherwise or when listed in force_categorical.
// Missing cells are an error: fits need complete cases.
Dataset load_csv(std::istream& in,
                 const std::vector<std::string>& force_categorical = {});
Dataset load_csv_file(const std::string& path,
                      const std::vector<std::string>& force_categorical = {});

// Term language: comma-separated terms, each `factor` or `factor:factor`,
// where a factor is `name` or `name^k` (k >= 1, numeric columns only).
// Categorical factors expand to treatment-coded indicators against the
// first level in file order.
struct TermFactor {
  std::string name;
  int power = 1;
};

struct Term {
  TermFactor lhs;
  std::optional<TermFactor> rhs;
};

std::vector<Term> parse_terms(const std::string& terms);

struct Design {
  Eigen::MatrixXd X;  // leading intercept column
  std::vector<std::string> names;
};

Design build_design(const Dataset& data, const std::vector<Term>& terms);

// Response column as a vector; must be numeric, nonnegative integers.
Eigen::VectorXd response_vector(const Dataset& data, const std::string& name);

}  // namespace cmpreg
