#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "eventea/dataset_io.hpp"
#include "eventea/train.hpp"

namespace fixtures {

// Twenty aligned event pairs told apart only by their year. Names also carry
// one of four descriptive words, and each target uses the word of the next
// source, so the non-time tokens point to wrong partners. The encoder must learn
// to discount them and rely on the time part.
inline eventea::Dataset toy_dataset() {
  eventea::Dataset ds;
  const std::vector<std::string> words{"Asian", "Arctic", "Pacific", "Alpine"};
  for (int i = 0; i < 20; ++i) {
    const std::string year = std::to_string(1990 + i);
    const std::string src = "src:Summer_Games_" + year;
    const std::string tgt = "tgt:Q" + std::to_string(100 + i);
    ds.source.add_attribute_triple(src, "label", year + " " + words[i % 4] + " Games");
    ds.source.add_attribute_triple(src, "country", "Qatar");
    ds.target.add_attribute_triple(tgt, "label", words[(i + 1) % 4] + " Games (" + year + ")");
    ds.target.add_attribute_triple(tgt, "host", "Qatar");
    ds.alignment.links.push_back({src, tgt});
    auto& split = i < 12 ? ds.alignment.train : (i < 16 ? ds.alignment.valid : ds.alignment.test);
    split.push_back(static_cast<std::size_t>(i));
  }
  for (int i = 0; i + 1 < 20; ++i) {
    const std::string a = "src:Summer_Games_" + std::to_string(1990 + i);
    const std::string b = "src:Summer_Games_" + std::to_string(1991 + i);
    ds.source.add_relation_triple(a, "followed_by", b);
    ds.target.add_relation_triple("tgt:Q" + std::to_string(100 + i), "P156", "tgt:Q" + std::to_string(101 + i));
  }
  return ds;
}

inline eventea::TrainConfig toy_config(std::uint64_t seed = 2022) {
  eventea::TrainConfig c;
  c.dim = 32;
  c.batch_size = 4;
  c.learning_rate = 3e-3;
  c.margin = 1.0;
  c.beta = 0.02;
  c.negatives_per_positive = 3;
  c.max_epochs = 50;
  c.patience = 50;
  c.seed = seed;
  return c;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("eventea_" + tag + "_" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
