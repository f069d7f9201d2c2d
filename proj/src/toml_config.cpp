// toml++ is large; keep it in its own translation unit.
#define TOML_EXCEPTIONS 1
#include <toml++/toml.hpp>

#include "leakscope/error.hpp"
#include "leakscope/experiment.hpp"

#include <sstream>

namespace leakscope::report {

nlohmann::json toml_to_json(std::string_view toml_text) {
  toml::table table;
  try {
    table = toml::parse(toml_text);
  } catch (const toml::parse_error &e) {
    std::ostringstream msg;
    msg << "toml: " << e.description() << " (line " << e.source().begin.line << ", column "
        << e.source().begin.column << ")";
    throw ValidationError(msg.str());
  }
  std::ostringstream os;
  os << toml::json_formatter{table};
  return nlohmann::json::parse(os.str());
}

} // namespace leakscope::report
