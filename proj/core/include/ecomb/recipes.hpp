#pragma once

#include <string>
#include <vector>

#include "ecomb/sweep.hpp"

namespace ecomb {

struct RecipeRequest {
  std::string name;
  std::string out_dir = ".";
  int workers = 1;
  bool full_scale = false; // desk-scale grids unless set
};

std::vector<std::string> recipe_names();

// Runs the named experiment and writes <name>.csv, <name>.records.json and
// <name>.manifest.json into out_dir. Returns the dataset that was written.
Dataset run_recipe(const RecipeRequest& req);

} // namespace ecomb
