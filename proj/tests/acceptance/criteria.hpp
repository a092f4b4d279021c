#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bg::acceptance {

struct Options {
  std::string workdir = "acceptance_artifacts";
  int worker_threads = 1;
};

struct Criterion {
  int id;
  const char* name;
  std::function<bool(const Options&, std::string&)> run;
};

const std::vector<Criterion>& all_criteria();
const Criterion* find(const std::vector<Criterion>& list, int id);

}  // namespace bg::acceptance
