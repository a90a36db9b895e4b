#include <charconv>
#include <fstream>

#include "qhist/experiment.hpp"

namespace qhist::experiment {

namespace {

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + file.string());
}

std::string csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json residual_json(const ResultBundle& bundle) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& r : bundle.residuals) {
    out[r.name] = {{"value", r.value}, {"tol", r.tol}, {"pass", r.pass}};
  }
  return out;
}

nlohmann::json table_json(const Table& t) {
  nlohmann::json cols = nlohmann::json::object();
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& row : t.rows) values.push_back(row[c]);
    cols[t.columns[c]] = std::move(values);
  }
  return {{"columns", t.columns}, {"data", std::move(cols)}};
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<std::filesystem::path> emit(const ResultBundle& bundle, Format format,
                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_file(written.back(), text);
  };

  if (format == Format::Json) {
    nlohmann::json doc;
    doc["metadata"] = bundle.metadata;
    doc["residuals"] = residual_json(bundle);
    doc["pass"] = bundle.passed();
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& t : bundle.tables) tables[t.name] = table_json(t);
    doc["tables"] = std::move(tables);
    put("result.json", doc.dump(2) + "\n");
    return written;
  }
  for (const auto& t : bundle.tables) put(t.name + ".csv", csv(t));
  put("residuals.json", residual_json(bundle).dump(2) + "\n");
  put("metadata.json", bundle.metadata.dump(2) + "\n");
  return written;
}

}  // namespace qhist::experiment
