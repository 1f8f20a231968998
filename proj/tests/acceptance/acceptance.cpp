// Runs the eleven acceptance criteria at full size and prints one line each.
// Exit status is the number of failed criteria (capped at 100).
//
//   acceptance [--settings FILE.json] [criterion ...]

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <vector>

#include "cle/criteria.hpp"
#include "cle/error.hpp"

using namespace cle;

int main(int argc, char** argv) {
  CriteriaSettings settings;
  std::vector<int> ids;
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--settings" && i + 1 < argc) {
        std::ifstream in(argv[++i]);
        if (!in) throw ConfigurationError(std::string("cannot open ") + argv[i]);
        settings = CriteriaSettings::from_json(nlohmann::json::parse(in), "settings");
      } else {
        ids.push_back(criterion_id(arg));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
  if (ids.empty())
    for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);

  std::cout << "seed " << settings.seed << '\n' << std::flush;
  const auto t0 = std::chrono::steady_clock::now();
  CriteriaRunner runner(settings);
  int failed = 0;
  for (int id : ids) {
    const auto r = runner.run(id);
    failed += r.passed ? 0 : 1;
    std::cout << format_result_line(r) << "  [" << static_cast<int>(r.seconds + 0.5) << " s]" << std::endl;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << ids.size() - failed << "/" << ids.size() << " criteria passed in " << static_cast<int>(total) << " s\n";
  return std::min(failed, 100);
}
