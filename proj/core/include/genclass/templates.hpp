#pragma once

#include <string>
#include <utility>
#include <vector>

namespace genclass {

/// Prompt blocks for one dataset. Loaded from a template directory with one
/// UTF-8 file per block; placeholders are {{name}} markers. A single trailing
/// newline in each file is stripped.
///
/// A rendered prompt is laid out as:
///   task_header
///   categories_line            ({{categories}} filled per strategy)
///   format_instruction         (text / numeric / uncertain variant)
///   definitions_header + definition_block per class   (definition strategies)
///   example_block per shot                            (shot strategies)
///   current_case_block
///   request_line
/// with one blank line between sections and between example blocks.
struct PromptTemplate {
  std::string task_header;
  std::string categories_line;            // {{categories}}
  std::string format_instruction;         // category-label wording
  std::string format_instruction_numeric; // numeric-label wording
  std::string format_instruction_uncertain;
  std::string definitions_header;
  std::string definition_block;           // {{label}}, {{definition}}
  std::string example_block;              // {{index}}, {{label}}, slot names
  std::string current_case_block;         // slot names
  std::string request_line;
};

PromptTemplate load_templates(const std::string& dir);

// {{name}} substitution; unknown placeholders raise Error{Validation}.
std::string render_placeholders(
    const std::string& block,
    const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace genclass
