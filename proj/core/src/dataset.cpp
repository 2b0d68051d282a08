#include "hsda/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hsda/error.hpp"

namespace hsda {

namespace {

constexpr std::string_view kMagic = "HDA v1";

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t end = text_.find('\n', pos_);
    line = text_.substr(pos_, end == std::string_view::npos ? end : end - pos_);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number_;
    return true;
  }

  std::size_t number() const noexcept { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::string_view expect_keyword(LineReader& reader, std::string_view keyword) {
  std::string_view line;
  if (!reader.next(line)) {
    throw ParseError(reader.number() + 1, "missing '" + std::string(keyword) + "' header");
  }
  if (line.size() <= keyword.size() || line.substr(0, keyword.size()) != keyword ||
      line[keyword.size()] != ' ') {
    throw ParseError(reader.number(), "expected '" + std::string(keyword) + " <value>'");
  }
  return line.substr(keyword.size() + 1);
}

struct Header {
  Eigen::Index dims = 0;
  Hierarchy hierarchy;
  bool labels = false;
};

Header read_header(LineReader& reader) {
  std::string_view line;
  if (!reader.next(line) || line != kMagic) {
    throw ParseError(1, "expected '" + std::string(kMagic) + "'");
  }
  const std::string_view dims_text = expect_keyword(reader, "dims");
  long long dims = 0;
  const auto [ptr, ec] =
      std::from_chars(dims_text.data(), dims_text.data() + dims_text.size(), dims);
  if (ec != std::errc() || ptr != dims_text.data() + dims_text.size() || dims <= 0) {
    throw ParseError(reader.number(), "dims must be a positive integer");
  }
  const std::string_view hierarchy_text = expect_keyword(reader, "hierarchy");
  const std::size_t hierarchy_line = reader.number();
  std::optional<Hierarchy> hierarchy;
  try {
    hierarchy.emplace(Hierarchy::parse(hierarchy_text));
  } catch (const Error& e) {
    throw ParseError(hierarchy_line, e.what());
  }
  const std::string_view labels = expect_keyword(reader, "labels");
  if (labels != "present" && labels != "absent") {
    throw ParseError(reader.number(), "labels must be 'present' or 'absent'");
  }
  return Header{static_cast<Eigen::Index>(dims), std::move(*hierarchy), labels == "present"};
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

HierLabel resolve_label(const Hierarchy& hierarchy, std::string_view parent,
                        std::string_view child, std::size_t row, std::size_t line) {
  const auto p = hierarchy.find_parent(parent);
  if (!p) {
    throw Error(ErrorKind::validation,
                "validation error: row " + std::to_string(row) + " (line " +
                    std::to_string(line) + ") has unknown parent id '" +
                    std::string(parent) + "'");
  }
  const auto c = hierarchy.find_child(child);
  if (!c) {
    throw Error(ErrorKind::validation,
                "validation error: row " + std::to_string(row) + " (line " +
                    std::to_string(line) + ") has unknown child id '" +
                    std::string(child) + "'");
  }
  if (hierarchy.parent_of(*c) != *p) {
    throw Error(ErrorKind::validation,
                "validation error: row " + std::to_string(row) + " (line " +
                    std::to_string(line) + ") puts child '" + std::string(child) +
                    "' under parent '" + std::string(parent) + "'");
  }
  return HierLabel{*p, *c};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io, "io error: cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::io, "io error: failed reading '" + path.string() + "'");
  }
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "io error: cannot open '" + path.string() + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorKind::io, "io error: failed writing '" + path.string() + "'");
  }
}

void write_header(std::string& out, Eigen::Index dims, const Hierarchy& hierarchy,
                  bool labels) {
  out += kMagic;
  out += "\ndims ";
  out += std::to_string(dims);
  out += "\nhierarchy ";
  out += hierarchy.to_string();
  out += labels ? "\nlabels present\n" : "\nlabels absent\n";
}

}  // namespace

std::string format_number(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) {
    throw Error(ErrorKind::validation, "validation error: cannot format number");
  }
  return std::string(buffer, ptr);
}

void validate(const DatasetBundle& bundle) {
  if (bundle.labels) {
    if (static_cast<Eigen::Index>(bundle.labels->size()) != bundle.features.rows()) {
      throw Error(ErrorKind::validation,
                  "validation error: " + std::to_string(bundle.labels->size()) +
                      " labels for " + std::to_string(bundle.features.rows()) + " rows");
    }
    validate_labels(bundle.hierarchy, *bundle.labels);
  }
}

std::string format_dataset(const DatasetBundle& bundle) {
  validate(bundle);
  std::string out;
  write_header(out, bundle.features.cols(), bundle.hierarchy, bundle.labels.has_value());
  const Eigen::MatrixXd& X = bundle.features.values();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (bundle.labels) {
      const HierLabel& l = (*bundle.labels)[static_cast<std::size_t>(i)];
      out += bundle.hierarchy.parent_name(l.parent);
      out += ',';
      out += bundle.hierarchy.child_name(l.child);
      out += ',';
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_number(X(i, j));
    }
    out += '\n';
  }
  return out;
}

DatasetBundle parse_dataset(std::string_view text, std::string name) {
  LineReader reader(text);
  Header header = read_header(reader);

  const std::size_t label_fields = header.labels ? 2 : 0;
  const std::size_t expected = label_fields + static_cast<std::size_t>(header.dims);
  std::vector<double> values;
  std::vector<HierLabel> labels;
  std::size_t rows = 0;
  std::string_view line;
  while (reader.next(line)) {
    const std::size_t line_no = reader.number();
    if (line.empty()) throw ParseError(line_no, "empty line");
    const auto fields = split_fields(line);
    if (fields.size() != expected) {
      throw Error(ErrorKind::validation,
                  "validation error: row " + std::to_string(rows) + " (line " +
                      std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(expected));
    }
    if (header.labels) {
      labels.push_back(resolve_label(header.hierarchy, fields[0], fields[1], rows, line_no));
    }
    for (std::size_t f = label_fields; f < fields.size(); ++f) {
      const std::string_view field = fields[f];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(line_no, "malformed number '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::validation,
                    "validation error: row " + std::to_string(rows) + " (line " +
                        std::to_string(line_no) + ") contains a non-finite value");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    throw Error(ErrorKind::empty_input, "empty-input error: dataset has no instances");
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), header.dims);
  for (std::size_t i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < header.dims; ++j) {
      X(static_cast<Eigen::Index>(i), j) =
          values[i * static_cast<std::size_t>(header.dims) + static_cast<std::size_t>(j)];
    }
  }
  std::optional<std::vector<HierLabel>> maybe_labels;
  if (header.labels) maybe_labels = std::move(labels);
  return DatasetBundle{FeatureMatrix(std::move(X)), std::move(maybe_labels),
                       std::move(header.hierarchy), std::move(name)};
}

DatasetBundle load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path), path.stem().string());
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& path) {
  write_file(path, format_dataset(bundle));
}

std::string format_truth(const TruthFile& truth) {
  validate_labels(truth.hierarchy, truth.labels);
  std::string out;
  write_header(out, truth.dims, truth.hierarchy, true);
  for (const HierLabel& l : truth.labels) {
    out += truth.hierarchy.parent_name(l.parent);
    out += ',';
    out += truth.hierarchy.child_name(l.child);
    out += '\n';
  }
  return out;
}

TruthFile parse_truth(std::string_view text) {
  LineReader reader(text);
  Header header = read_header(reader);
  if (!header.labels) {
    throw ParseError(4, "truth sidecar must declare 'labels present'");
  }
  std::vector<HierLabel> labels;
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) throw ParseError(reader.number(), "empty line");
    const auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw ParseError(reader.number(), "truth rows carry exactly 'parent,child'");
    }
    labels.push_back(resolve_label(header.hierarchy, fields[0], fields[1], labels.size(),
                                   reader.number()));
  }
  return TruthFile{header.dims, std::move(header.hierarchy), std::move(labels)};
}

TruthFile load_truth(const std::filesystem::path& path) {
  return parse_truth(read_file(path));
}

void save_truth(const TruthFile& truth, const std::filesystem::path& path) {
  write_file(path, format_truth(truth));
}

}  // namespace hsda
