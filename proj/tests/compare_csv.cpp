// Compares two numeric CSV files with a header row:
//   compare_csv actual expected [rtol] [atol]
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: compare_csv actual expected [rtol] [atol]\n";
    return 2;
  }
  const double rtol = argc > 3 ? std::atof(argv[3]) : 1e-8;
  const double atol = argc > 4 ? std::atof(argv[4]) : 1e-10;
  std::ifstream a(argv[1]), e(argv[2]);
  if (!a || !e) {
    std::cerr << "cannot open inputs\n";
    return 2;
  }
  std::string la, le;
  std::getline(a, la);
  std::getline(e, le);
  if (la != le) {
    std::cerr << "header mismatch\n";
    return 1;
  }
  const auto cols = split(le);
  int row = 0, bad = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(a, la)), ge = static_cast<bool>(std::getline(e, le));
    if (ga != ge) {
      std::cerr << "row count differs after " << row << " rows\n";
      return 1;
    }
    if (!ga) break;
    ++row;
    const auto va = split(la), ve = split(le);
    if (va.size() != ve.size()) {
      std::cerr << "row " << row << ": column count differs\n";
      return 1;
    }
    for (std::size_t c = 0; c < ve.size(); ++c) {
      const double x = std::atof(va[c].c_str()), y = std::atof(ve[c].c_str());
      if (std::abs(x - y) > atol + rtol * std::abs(y) && ++bad <= 10)
        std::fprintf(stderr, "row %d %s: %.17g vs %.17g\n", row, cols[c].c_str(), x, y);
    }
  }
  std::printf("%d rows compared, %d mismatches\n", row, bad);
  return bad == 0 ? 0 : 1;
}
