#include "genclass/templates.hpp"

#include <filesystem>

#include "genclass/errors.hpp"
#include "genclass/util.hpp"

namespace genclass {

namespace {

std::string load_block(const std::filesystem::path& dir, const char* stem,
                       bool required = true) {
  auto path = dir / (std::string(stem) + ".txt");
  if (!std::filesystem::exists(path)) {
    if (required) {
      throw Error(ErrorKind::Io, "missing template block: " + path.string());
    }
    return {};
  }
  std::string content = read_file(path.string());
  // Block files end with the editor's final newline; it is not part of the block.
  if (content.ends_with("\r\n")) {
    content.erase(content.size() - 2);
  } else if (content.ends_with("\n")) {
    content.pop_back();
  }
  return content;
}

}  // namespace

PromptTemplate load_templates(const std::string& dir) {
  std::filesystem::path base(dir);
  if (!std::filesystem::is_directory(base)) {
    throw Error(ErrorKind::Io, "template directory not found: " + dir);
  }
  PromptTemplate t;
  t.task_header = load_block(base, "task_header");
  t.categories_line = load_block(base, "categories_line");
  t.format_instruction = load_block(base, "format_instruction");
  t.format_instruction_numeric = load_block(base, "format_instruction_numeric");
  t.format_instruction_uncertain = load_block(base, "format_instruction_uncertain");
  t.definitions_header = load_block(base, "definitions_header", /*required=*/false);
  t.definition_block = load_block(base, "definition_block", /*required=*/false);
  t.example_block = load_block(base, "example_block");
  t.current_case_block = load_block(base, "current_case_block");
  t.request_line = load_block(base, "request_line");
  return t;
}

std::string render_placeholders(
    const std::string& block,
    const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(block.size());
  size_t pos = 0;
  while (pos < block.size()) {
    size_t open = block.find("{{", pos);
    if (open == std::string::npos) {
      out.append(block, pos, std::string::npos);
      break;
    }
    out.append(block, pos, open - pos);
    size_t close = block.find("}}", open + 2);
    if (close == std::string::npos) {
      throw Error(ErrorKind::Validation, "unterminated placeholder in template block");
    }
    std::string name = block.substr(open + 2, close - open - 2);
    bool found = false;
    for (const auto& [key, value] : values) {
      if (key == name) {
        out += value;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorKind::Validation, "unknown template placeholder: " + name);
    }
    pos = close + 2;
  }
  return out;
}

}  // namespace genclass
