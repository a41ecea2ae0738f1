#pragma once

#include <string>

#include "genclass/io.hpp"
#include "genclass/templates.hpp"
#include "genclass/types.hpp"
#include "genclass/util.hpp"

namespace test_helpers {

inline genclass::LabelSchema ec_schema() {
  return genclass::load_schema(std::string(GENCLASS_SCHEMA_DIR) + "/ec.json");
}

inline genclass::PromptTemplate ec_templates() {
  return genclass::load_templates(std::string(GENCLASS_TEMPLATE_DIR) + "/ec");
}

inline genclass::Example make_example(std::string id, std::string text,
                                      std::string gold) {
  genclass::Example ex;
  ex.id = std::move(id);
  ex.slots["text"] = std::move(text);
  ex.gold = std::move(gold);
  return ex;
}

// Golden files follow the template-block convention: exactly one trailing
// newline, which is not part of the prompt.
inline std::string read_golden(const std::string& name) {
  std::string content =
      genclass::read_file(std::string(GENCLASS_GOLDEN_DIR) + "/ec/" + name + ".txt");
  if (content.ends_with("\n")) content.pop_back();
  return content;
}

// Plain A/B/C-style schema for tests that do not care about EC.
inline genclass::LabelSchema abc_schema(size_t n = 3) {
  genclass::LabelSchema schema;
  for (size_t i = 0; i < n; ++i) {
    schema.labels.push_back(std::string(1, static_cast<char>('A' + i)));
  }
  schema.uncertain_label = "uncertain";
  return schema;
}

}  // namespace test_helpers
