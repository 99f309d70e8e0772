#include "leveldef/lexicon.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "leveldef/error.hpp"

namespace leveldef {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::missing_data, "word list not found: " + path);
  }
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(ascii_lower(line));
  }
  return words;
}

Lexicons Lexicons::load(const std::string& data_dir) {
  const std::string lex = data_dir + "/lexicons";
  Lexicons out;
  out.dale_chall = load_word_list(data_dir + "/dale_chall_3000.txt");
  out.pronouns = load_word_list(lex + "/pronouns.txt");
  out.coordinators = load_word_list(lex + "/coordinators.txt");
  out.subordinators = load_word_list(lex + "/subordinators.txt");
  out.reporting_verbs = load_word_list(lex + "/reporting_verbs.txt");
  out.abbreviations = load_word_list(lex + "/abbreviations.txt");
  return out;
}

std::string default_data_dir() {
  if (const char* env = std::getenv("LEVELDEF_DATA_DIR"); env && *env) {
    return env;
  }
#ifdef LEVELDEF_DATA_DIR_DEFAULT
  if (std::filesystem::exists(LEVELDEF_DATA_DIR_DEFAULT)) {
    return LEVELDEF_DATA_DIR_DEFAULT;
  }
#endif
#ifdef LEVELDEF_DATA_DIR_INSTALLED
  if (std::filesystem::exists(LEVELDEF_DATA_DIR_INSTALLED)) {
    return LEVELDEF_DATA_DIR_INSTALLED;
  }
#endif
  return "data";
}

Lexicons Lexicons::bundled() { return Lexicons::load(default_data_dir()); }

}  // namespace leveldef
