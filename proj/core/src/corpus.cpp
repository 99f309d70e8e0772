#include "leveldef/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"

namespace leveldef {

const char* level_name(Level l) {
  switch (l) {
    case Level::A1: return "A1";
    case Level::A2: return "A2";
    case Level::B1: return "B1";
    case Level::B2: return "B2";
    case Level::C1: return "C1";
    case Level::C2: return "C2";
  }
  return "?";
}

Level parse_level(std::string_view name) {
  for (Level l : kAllLevels) {
    if (name == level_name(l)) return l;
  }
  throw Error(Errc::unknown_label, "unknown level label: '" + std::string(name) +
                                       "' (expected one of A1, A2, B1, B2, C1, C2)");
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "csv") return CorpusFormat::csv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  throw Error(Errc::parse, "unknown corpus format: '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CSV (RFC-4180)
// ---------------------------------------------------------------------------

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // physical line where the record starts
};

std::vector<CsvRecord> parse_csv(std::string_view data) {
  std::vector<CsvRecord> records;
  std::size_t i = 0;
  std::size_t line = 1;
  if (data.size() >= 3 && data.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // BOM
  while (i < data.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool record_done = false;
    bool at_field_start = true;
    while (i < data.size() && !record_done) {
      const char c = data[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < data.size() && data[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (at_field_start) {
            in_quotes = true;
          } else {
            throw Error(Errc::parse, "CSV line " + std::to_string(line) +
                                         ": unexpected quote inside unquoted field");
          }
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          at_field_start = true;
          ++i;
          continue;
        case '\r':
          if (i + 1 < data.size() && data[i + 1] == '\n') ++i;
          [[fallthrough]];
        case '\n':
          ++i;
          ++line;
          record_done = true;
          continue;
        default:
          field += c;
          ++i;
          break;
      }
      at_field_start = (c == ',');
    }
    if (in_quotes) {
      throw Error(Errc::parse, "CSV line " + std::to_string(rec.line) + ": unterminated quote");
    }
    rec.fields.push_back(std::move(field));
    // Skip blank separator lines (a lone empty field from "\n\n").
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

LabeledCorpus load_csv_corpus(const std::string& path, std::string_view data) {
  const auto records = parse_csv(data);
  if (records.empty()) {
    throw Error(Errc::parse, path + ": empty CSV (header row required)");
  }
  const auto& header = records.front().fields;
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return static_cast<std::size_t>(-1);
  };
  const std::size_t text_col = column("text");
  const std::size_t label_col = column("label");
  const std::size_t label2_col = column("label2");
  if (text_col == static_cast<std::size_t>(-1) || label_col == static_cast<std::size_t>(-1)) {
    throw Error(Errc::parse, path + " line 1: header must contain 'text' and 'label'");
  }
  LabeledCorpus corpus;
  corpus.source_id = path;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = path + " line " + std::to_string(rec.line);
    if (rec.fields.size() <= std::max(text_col, label_col)) {
      throw Error(Errc::parse, where + ": expected at least " +
                                   std::to_string(std::max(text_col, label_col) + 1) + " fields");
    }
    CorpusItem item;
    item.text = rec.fields[text_col];
    if (item.text.empty()) {
      throw Error(Errc::parse, where + ": empty text");
    }
    try {
      item.label = parse_level(rec.fields[label_col]);
      if (label2_col != static_cast<std::size_t>(-1) && label2_col < rec.fields.size() &&
          !rec.fields[label2_col].empty()) {
        item.label2 = parse_level(rec.fields[label2_col]);
      }
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

LabeledCorpus load_jsonl_corpus(const std::string& path, std::string_view data) {
  LabeledCorpus corpus;
  corpus.source_id = path;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= data.size()) {
    const std::size_t nl = data.find('\n', pos);
    std::string_view raw = data.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = (nl == std::string_view::npos) ? data.size() + 1 : nl + 1;
    ++line;
    while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ')) raw.remove_suffix(1);
    if (raw.empty()) continue;
    const std::string where = path + " line " + std::to_string(line);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("text") || !j.contains("label")) {
      throw Error(Errc::parse, where + ": expected an object with 'text' and 'label'");
    }
    CorpusItem item;
    item.text = j.at("text").get<std::string>();
    if (item.text.empty()) {
      throw Error(Errc::parse, where + ": empty text");
    }
    try {
      item.label = parse_level(j.at("label").get<std::string>());
      if (j.contains("label2") && !j.at("label2").is_null()) {
        item.label2 = parse_level(j.at("label2").get<std::string>());
      }
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

}  // namespace

LabeledCorpus load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open corpus: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  return format == CorpusFormat::csv ? load_csv_corpus(path, data)
                                     : load_jsonl_corpus(path, data);
}

void save_corpus(const LabeledCorpus& corpus, const std::string& path, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write corpus: " + path);
  if (format == CorpusFormat::csv) {
    out << "text,label,label2\n";
    for (const CorpusItem& item : corpus.items) {
      out << csv_escape(item.text) << ',' << level_name(item.label) << ','
          << (item.label2 ? level_name(*item.label2) : "") << '\n';
    }
  } else {
    for (const CorpusItem& item : corpus.items) {
      nlohmann::ordered_json j{{"text", item.text}, {"label", level_name(item.label)}};
      if (item.label2) j["label2"] = level_name(*item.label2);
      out << j.dump() << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Split and agreement
// ---------------------------------------------------------------------------

SplitResult stratified_split(const LabeledCorpus& corpus, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::parse, "train_fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, kLevelCount> by_class;
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    by_class[ordinal(corpus.items[i].label)].push_back(i);
  }
  std::mt19937_64 gen(seed);
  SplitResult result;
  for (Level l : kAllLevels) {
    auto& indices = by_class[ordinal(l)];
    if (indices.empty()) continue;
    if (indices.size() < 2) {
      throw Error(Errc::class_too_small,
                  std::string("class ") + level_name(l) + " has fewer than 2 items");
    }
    // Hand-rolled Fisher-Yates; std::shuffle is not bit-stable across
    // standard libraries and splits must reproduce everywhere.
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
      std::swap(indices[i], indices[j]);
    }
    auto take = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(indices.size())));
    take = std::clamp<std::size_t>(take, 1, indices.size() - 1);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      (k < take ? result.train_indices : result.validation_indices).push_back(indices[k]);
    }
  }
  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.validation_indices.begin(), result.validation_indices.end());
  result.train.source_id = corpus.source_id + "#train";
  result.validation.source_id = corpus.source_id + "#validation";
  for (std::size_t i : result.train_indices) result.train.items.push_back(corpus.items[i]);
  for (std::size_t i : result.validation_indices) {
    result.validation.items.push_back(corpus.items[i]);
  }
  return result;
}

double agreement_score(const LabeledCorpus& corpus) {
  if (corpus.items.empty()) {
    throw Error(Errc::degenerate_input, "agreement_score: empty corpus");
  }
  std::size_t matches = 0;
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    const CorpusItem& item = corpus.items[i];
    if (!item.label2) {
      throw Error(Errc::missing_second_label,
                  "agreement_score: item " + std::to_string(i) + " has no label2");
    }
    if (*item.label2 == item.label) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(corpus.items.size());
}

FeatureMatrix build_matrix(const LabeledCorpus& corpus, const FeatureCatalog& catalog,
                           const Lexicons& lex) {
  FeatureMatrix matrix;
  matrix.catalog = catalog;
  matrix.rows.reserve(corpus.items.size());
  matrix.labels.reserve(corpus.items.size());
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    try {
      matrix.rows.push_back(extract_features(corpus.items[i].text, catalog, lex));
    } catch (const Error& e) {
      throw Error(e.code(), "row " + std::to_string(i) + ": " + e.what());
    }
    matrix.labels.push_back(corpus.items[i].label);
  }
  return matrix;
}

}  // namespace leveldef
