#include "radpipe/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "radpipe/serialize.hpp"

namespace radpipe {

namespace {

double gini(long n0, long n1) {
  const long n = n0 + n1;
  if (n == 0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct Builder {
  const BinaryRows& x;
  const std::vector<int>& y;
  const TreeOptions& opts;
  int n_features;

  std::unique_ptr<TreeNode> build(std::vector<int>& idx, int depth) {
    auto node = std::make_unique<TreeNode>();
    node->n_samples = static_cast<long>(idx.size());
    for (int i : idx) (y[i] ? node->n1 : node->n0) += 1;
    node->cls = node->n1 > node->n0 ? 1 : 0;  // tie -> class 0

    if (node->n0 == 0 || node->n1 == 0) return node;                            // pure
    if (opts.max_depth > 0 && depth >= opts.max_depth) return node;             // depth cap
    if (node->n_samples < opts.min_samples_split) return node;

    // Candidate features, ascending so ties keep the lowest index.
    std::vector<int> candidates;
    if (opts.mtry > 0 && opts.mtry < n_features) {
      if (opts.rng == nullptr) throw std::invalid_argument("fit_tree: mtry needs an rng");
      candidates = opts.rng->sample_indices(n_features, opts.mtry);
    } else {
      candidates.resize(n_features);
      for (int f = 0; f < n_features; ++f) candidates[f] = f;
    }

    const double parent_gini = gini(node->n0, node->n1);
    const double n = static_cast<double>(node->n_samples);
    double best_gain = 0.0;
    int best_feature = -1;

    for (int f : candidates) {
      long l0 = 0, l1 = 0;
      for (int i : idx) {
        if (!x[i][f]) (y[i] ? l1 : l0) += 1;
      }
      const long r0 = node->n0 - l0, r1 = node->n1 - l1;
      const long nl = l0 + l1, nr = r0 + r1;
      if (nl == 0 || nr == 0) continue;
      const double gain =
          parent_gini - (nl / n) * gini(l0, l1) - (nr / n) * gini(r0, r1);
      if (gain > best_gain) {  // strict: equal gains keep the earlier (lower) feature
        best_gain = gain;
        best_feature = f;
      }
    }
    if (best_feature < 0 || best_gain <= 0.0) return node;  // no positive decrease

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) (x[i][best_feature] ? right_idx : left_idx).push_back(i);

    node->leaf = false;
    node->feature = best_feature;
    node->impurity_decrease = best_gain;
    node->left = build(left_idx, depth + 1);
    node->right = build(right_idx, depth + 1);
    return node;
  }
};

}  // namespace

std::unique_ptr<TreeNode> fit_tree(const BinaryRows& x, const std::vector<int>& y,
                                   const TreeOptions& opts) {
  if (x.empty()) throw std::invalid_argument("fit_tree: empty data");
  if (x.size() != y.size()) throw std::invalid_argument("fit_tree: row/label count mismatch");
  const int p = static_cast<int>(x[0].size());
  for (const auto& row : x)
    if (static_cast<int>(row.size()) != p) throw std::invalid_argument("fit_tree: ragged rows");

  Builder b{x, y, opts, p};
  std::vector<int> idx(x.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return b.build(idx, 0);
}

int tree_predict(const TreeNode& node, std::span<const uint8_t> row) {
  const TreeNode* n = &node;
  while (!n->leaf) n = row[n->feature] ? n->right.get() : n->left.get();
  return n->cls;
}

std::vector<int> tree_predict(const TreeNode& node, const BinaryRows& x) {
  std::vector<int> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = tree_predict(node, x[i]);
  return out;
}

namespace {
void accumulate_importance(const TreeNode& node, long n_total, Vec& acc) {
  if (node.leaf) return;
  acc[node.feature] +=
      (static_cast<double>(node.n_samples) / static_cast<double>(n_total)) * node.impurity_decrease;
  accumulate_importance(*node.left, n_total, acc);
  accumulate_importance(*node.right, n_total, acc);
}
}  // namespace

Vec tree_importances(const TreeNode& root, int n_features, long n_total) {
  Vec acc(n_features, 0.0);
  accumulate_importance(root, n_total, acc);
  return acc;
}

int tree_node_count(const TreeNode& root) {
  if (root.leaf) return 1;
  return 1 + tree_node_count(*root.left) + tree_node_count(*root.right);
}

int tree_depth(const TreeNode& root) {
  if (root.leaf) return 0;
  return 1 + std::max(tree_depth(*root.left), tree_depth(*root.right));
}

Forest fit_forest(const BinaryRows& x, const std::vector<int>& y, const ForestOptions& opts) {
  if (x.empty()) throw std::invalid_argument("fit_forest: empty data");
  if (opts.n_trees < 1) throw std::invalid_argument("fit_forest: n_trees must be >= 1");
  const int p = static_cast<int>(x[0].size());
  const int mtry = opts.mtry > 0 ? opts.mtry
                                 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));

  Forest f;
  f.mtry = mtry;
  f.n_features = p;
  f.trees.resize(opts.n_trees);
  f.tree_seeds.resize(opts.n_trees);
  for (int t = 0; t < opts.n_trees; ++t) f.tree_seeds[t] = opts.seed + static_cast<uint64_t>(t);

  const long n = static_cast<long>(x.size());
  std::vector<Vec> per_tree_importance(opts.n_trees);

  auto train_one = [&](int t) {
    Rng rng(f.tree_seeds[t]);
    BinaryRows bx;
    std::vector<int> by;
    const BinaryRows* px = &x;
    const std::vector<int>* py = &y;
    if (opts.bootstrap) {
      bx.reserve(x.size());
      by.reserve(x.size());
      for (long i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(rng.below(static_cast<uint64_t>(n)));
        bx.push_back(x[k]);
        by.push_back(y[k]);
      }
      px = &bx;
      py = &by;
    }
    TreeOptions topt;
    topt.max_depth = opts.max_depth;
    topt.min_samples_split = opts.min_samples_split;
    topt.mtry = mtry;
    topt.rng = &rng;
    f.trees[t] = fit_tree(*px, *py, topt);
    per_tree_importance[t] = tree_importances(*f.trees[t], p, n);
  };

  if (opts.n_threads > 1 && opts.n_trees > 1) {
    std::vector<std::thread> pool;
    const int workers = std::min(opts.n_threads, opts.n_trees);
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < opts.n_trees; t = next.fetch_add(1)) train_one(t);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int t = 0; t < opts.n_trees; ++t) train_one(t);
  }

  // Sum in tree order so the reduction is independent of scheduling.
  f.importances.assign(p, 0.0);
  for (int t = 0; t < opts.n_trees; ++t)
    for (int j = 0; j < p; ++j) f.importances[j] += per_tree_importance[t][j];
  double total = 0.0;
  for (double v : f.importances) total += v;
  if (total > 0.0)
    for (double& v : f.importances) v /= total;
  return f;
}

int forest_predict(const Forest& f, std::span<const uint8_t> row) {
  long votes1 = 0;
  for (const auto& t : f.trees) votes1 += tree_predict(*t, row);
  const long votes0 = static_cast<long>(f.trees.size()) - votes1;
  return votes1 > votes0 ? 1 : 0;  // tie -> class 0
}

std::vector<int> forest_predict(const Forest& f, const BinaryRows& x) {
  std::vector<int> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = forest_predict(f, x[i]);
  return out;
}

namespace {

void write_node(TextWriter& w, const TreeNode& n) {
  if (n.leaf) {
    w.word("leaf").num(n.cls).num(n.n0).num(n.n1).nl();
  } else {
    w.word("split").num(n.feature).num(n.n_samples).num(n.impurity_decrease).num(n.n0).num(n.n1).nl();
    write_node(w, *n.left);
    write_node(w, *n.right);
  }
}

std::unique_ptr<TreeNode> read_node(TextReader& r) {
  auto node = std::make_unique<TreeNode>();
  const std::string kind = r.next();
  if (kind == "leaf") {
    node->cls = static_cast<int>(r.next_long());
    node->n0 = r.next_long();
    node->n1 = r.next_long();
    node->n_samples = node->n0 + node->n1;
  } else if (kind == "split") {
    node->leaf = false;
    node->feature = static_cast<int>(r.next_long());
    node->n_samples = r.next_long();
    node->impurity_decrease = r.next_double();
    node->n0 = r.next_long();
    node->n1 = r.next_long();
    node->cls = node->n1 > node->n0 ? 1 : 0;
    node->left = read_node(r);
    node->right = read_node(r);
  } else {
    r.fail("expected 'leaf' or 'split', got '" + kind + "'");
  }
  return node;
}

}  // namespace

void save_tree(std::ostream& os, const TreeNode& root) {
  TextWriter w(os);
  w.word("radpipe-tree").word("v1").nl();
  write_node(w, root);
  w.word("end").nl();
}

void save_tree(const std::string& path, const TreeNode& root) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_tree(out, root);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::unique_ptr<TreeNode> load_tree(std::istream& is, const std::string& name) {
  TextReader r(is, name);
  r.expect("radpipe-tree");
  r.expect("v1");
  auto root = read_node(r);
  r.expect("end");
  return root;
}

std::unique_ptr<TreeNode> load_tree(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_tree(in, path);
}

void Forest::save(std::ostream& os) const {
  TextWriter w(os);
  w.word("radpipe-forest").word("v1").nl();
  w.word("n_trees").num(static_cast<long>(trees.size())).nl();
  w.word("mtry").num(mtry).nl();
  w.word("n_features").num(n_features).nl();
  w.word("seeds").nl();
  for (uint64_t s : tree_seeds) w.num(s).nl();
  w.vec("importances", importances);
  for (size_t t = 0; t < trees.size(); ++t) {
    w.word("tree").num(static_cast<long>(t)).nl();
    write_node(w, *trees[t]);
  }
  w.word("end").nl();
}

void Forest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Forest Forest::load(std::istream& is, const std::string& name) {
  TextReader r(is, name);
  r.expect("radpipe-forest");
  r.expect("v1");
  Forest f;
  r.expect("n_trees");
  const long nt = r.next_long();
  r.expect("mtry");
  f.mtry = static_cast<int>(r.next_long());
  r.expect("n_features");
  f.n_features = static_cast<int>(r.next_long());
  r.expect("seeds");
  f.tree_seeds.resize(static_cast<size_t>(nt));
  for (auto& s : f.tree_seeds) s = r.next_u64();
  f.importances = r.next_vec("importances");
  for (long t = 0; t < nt; ++t) {
    r.expect("tree");
    if (r.next_long() != t) r.fail("tree index out of order");
    f.trees.push_back(read_node(r));
  }
  r.expect("end");
  return f;
}

Forest Forest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load(in, path);
}

}  // namespace radpipe
