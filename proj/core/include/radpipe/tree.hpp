#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radpipe/linear.hpp"  // BinaryRows
#include "radpipe/mat.hpp"
#include "radpipe/rng.hpp"

namespace radpipe {

/// CART node over binary features: left subtree takes x[feature] == 0,
/// right takes x[feature] == 1.
struct TreeNode {
  bool leaf = true;
  int cls = 0;                     // majority class, tie -> 0
  long n0 = 0, n1 = 0;             // class counts of the training subset
  int feature = -1;                // split feature (splits only)
  double impurity_decrease = 0.0;  // Gini decrease of this split
  long n_samples = 0;
  std::unique_ptr<TreeNode> left, right;
};

struct TreeOptions {
  int max_depth = 0;          // 0 = unlimited
  int min_samples_split = 2;
  int mtry = 0;               // features sampled per split; 0 = all
  Rng* rng = nullptr;         // required when mtry > 0
};

/// Greedy CART: split maximizing the Gini impurity decrease, ties toward
/// the lowest feature index; stops on purity, the depth cap,
/// min_samples_split, or no positive decrease. Throws on empty data.
std::unique_ptr<TreeNode> fit_tree(const BinaryRows& x, const std::vector<int>& y,
                                   const TreeOptions& opts = {});

int tree_predict(const TreeNode& node, std::span<const uint8_t> row);
std::vector<int> tree_predict(const TreeNode& node, const BinaryRows& x);

/// Sample-weighted Gini importance per feature, unnormalized.
Vec tree_importances(const TreeNode& root, int n_features, long n_total);

int tree_node_count(const TreeNode& root);
int tree_depth(const TreeNode& root);

void save_tree(std::ostream& os, const TreeNode& root);
void save_tree(const std::string& path, const TreeNode& root);
std::unique_ptr<TreeNode> load_tree(std::istream& is, const std::string& name);
std::unique_ptr<TreeNode> load_tree(const std::string& path);

struct ForestOptions {
  int n_trees = 100;
  int mtry = 0;       // 0 = ceil(sqrt(p))
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;
  uint64_t seed = 0;
  bool bootstrap = true;
  int n_threads = 1;  // per-tree seeding keeps any thread count bit-identical
};

struct Forest {
  std::vector<std::unique_ptr<TreeNode>> trees;
  std::vector<uint64_t> tree_seeds;
  int mtry = 0;
  int n_features = 0;
  Vec importances;  // normalized to sum 1 when any split exists, else zeros

  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static Forest load(std::istream& is, const std::string& name);
  static Forest load(const std::string& path);
};

/// Bootstrap + per-split feature subsampling; tree t draws everything from
/// seed + t, so parallel training is bit-identical to sequential.
Forest fit_forest(const BinaryRows& x, const std::vector<int>& y, const ForestOptions& opts = {});

/// Majority vote over the trees, tie -> class 0.
int forest_predict(const Forest& f, std::span<const uint8_t> row);
std::vector<int> forest_predict(const Forest& f, const BinaryRows& x);

}  // namespace radpipe
