#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "keystage/lexicons.hpp"

namespace test_support {

inline std::filesystem::path resources() { return KEYSTAGE_TEST_RESOURCES; }
inline std::filesystem::path fixtures() { return KEYSTAGE_TEST_FIXTURES; }

inline const keystage::lexicons::Lexicons& lexicons() {
  static const auto lex =
      keystage::lexicons::Lexicons::load(keystage::lexicons::ResourcePaths::under(resources()));
  return lex;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("keystage_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support
