#include "toric/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace toric {

namespace {

using Mat = std::vector<std::vector<double>>;

Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

double det_double(Mat m) {
  const std::size_t n = m.size();
  double det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[p][c])) p = r;
    if (m[p][c] == 0) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

struct Pulling {
  const std::vector<LogConstraint>& cons;
  const std::vector<LogVertex>& verts;
  std::size_t dim;
  std::vector<std::vector<std::size_t>> simplices;

  std::vector<std::size_t> common_tight(const std::vector<std::size_t>& face) const {
    std::vector<std::size_t> t = verts[face[0]].tight;
    for (std::size_t i = 1; i < face.size(); ++i) {
      std::vector<std::size_t> next;
      std::set_intersection(t.begin(), t.end(), verts[face[i]].tight.begin(), verts[face[i]].tight.end(),
                            std::back_inserter(next));
      t = next;
    }
    return t;
  }

  std::size_t face_dim(const std::vector<std::size_t>& tight) const {
    QMat rows;
    for (auto k : tight) rows.push_back(cons[k].normal);
    return dim - rank(rows);
  }

  void run(const std::vector<std::size_t>& face, std::size_t k, std::vector<std::size_t> apex) {
    if (face.size() == k + 1) {
      auto s = apex;
      s.insert(s.end(), face.begin(), face.end());
      simplices.push_back(s);
      return;
    }
    const std::size_t v0 = face[0];
    const auto tight_face = common_tight(face);
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t c = 0; c < cons.size(); ++c) {
      if (std::binary_search(tight_face.begin(), tight_face.end(), c)) continue;
      std::vector<std::size_t> sub;
      for (auto v : face)
        if (std::binary_search(verts[v].tight.begin(), verts[v].tight.end(), c)) sub.push_back(v);
      if (sub.size() < k || std::find(sub.begin(), sub.end(), v0) != sub.end()) continue;
      if (face_dim(common_tight(sub)) != k - 1) continue;
      if (!seen.insert(sub).second) continue;
      auto next_apex = apex;
      next_apex.push_back(v0);
      run(sub, k - 1, next_apex);
    }
  }
};

}  // namespace

double exp_divided_difference(const std::vector<double>& z) {
  const std::size_t n = z.size();
  if (n == 0) return 0;
  const double zmax = *std::max_element(z.begin(), z.end());
  Mat a(n, std::vector<double>(n, 0.0));
  double norm = 1;
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = z[i] - zmax;
    if (i + 1 < n) a[i][i + 1] = 1;
    norm = std::max(norm, std::fabs(a[i][i]) + 1);
  }
  int s = 0;
  while (norm > 0.5) {
    norm /= 2;
    ++s;
  }
  const double scale = std::ldexp(1.0, -s);
  for (auto& row : a)
    for (auto& x : row) x *= scale;
  Mat result(n, std::vector<double>(n, 0.0));
  Mat term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1;
  for (int k = 1; k <= 30; ++k) {
    term = matmul(term, a);
    for (auto& row : term)
      for (auto& x : row) x /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int k = 0; k < s; ++k) result = matmul(result, result);
  return std::exp(zmax) * result[0][n - 1];
}

double integrate_exp_simplex(const std::vector<std::vector<double>>& vertices, const std::vector<double>& omega) {
  const std::size_t k = omega.size();
  Mat edges;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    std::vector<double> e(k);
    for (std::size_t j = 0; j < k; ++j) e[j] = vertices[i][j] - vertices[0][j];
    edges.push_back(e);
  }
  std::vector<double> z;
  for (const auto& v : vertices) {
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += omega[j] * v[j];
    z.push_back(s);
  }
  return std::fabs(det_double(edges)) * exp_divided_difference(z);
}

double integrate_exp_polytope(const std::vector<LogConstraint>& constraints, std::size_t dim, const QVec& omega) {
  if (!is_bounded(constraints, dim)) throw ValidationError("region is unbounded: its measure is infinite");
  auto verts = log_vertices(constraints, dim);
  if (verts.size() < dim + 1) return 0;
  Pulling pull{constraints, verts, dim, {}};
  std::vector<std::size_t> all(verts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (pull.face_dim(pull.common_tight(all)) != dim) return 0;
  pull.run(all, dim, {});
  std::vector<double> w;
  for (const auto& x : omega) w.push_back(x.get_d());
  std::vector<std::vector<double>> coords;
  for (const auto& v : verts) coords.push_back(v.logs());
  double total = 0;
  for (const auto& s : pull.simplices) {
    std::vector<std::vector<double>> pts;
    for (auto i : s) pts.push_back(coords[i]);
    total += integrate_exp_simplex(pts, w);
  }
  return total;
}

}  // namespace toric
