#include <cstdio>
#include <string>

#include "quasiquad/diskquad.hpp"

// Regenerates the committed replacement-cavity table. Optional argument
// overrides the output path.
int main(int argc, char** argv) {
  std::string path =
      argc > 1 ? argv[1] : std::string(QUASIQUAD_DATA_DIR) + "/disk_table.json";
  auto table = quasiquad::enumerate_disk_quadrangulations();
  quasiquad::save_disk_table(table, path);
  for (const auto& [key, vec] : table.entries)
    std::printf("b=%-2d i=%d  %5d\n", key.first, key.second, (int)vec.size());
  std::printf("total %d -> %s\n", table.total_count(), path.c_str());
  return 0;
}
