#ifndef LEVELDEF_ERROR_HPP
#define LEVELDEF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace leveldef {

enum class Errc {
  parse,                // malformed input file (CSV/JSONL/JSON), carries line info in message
  unknown_label,        // label outside the six-level scheme
  unknown_descriptor,   // catalog id the extractor cannot compute
  degenerate_input,     // zero tokens / zero sentences where counts are required
  dimension_mismatch,   // feature vector length != catalog size
  missing_data,         // word list or lexicon file absent
  class_too_small,      // stratified split needs >= 2 items per class
  missing_second_label, // agreement score needs label2 on every item
  empty_matrix,
  empty_node,           // gini of zero total
  no_paths_for_label,
  empty_definition,
  empty_set,
  unknown_property,     // Manchester property not in catalog
  syntax,               // Manchester parse error, position in message
  io,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace leveldef

#endif
