#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "logmaint/detail/json_io.hpp"
#include "logmaint/detail/rng.hpp"
#include "logmaint/error.hpp"
#include "logmaint/textnorm.hpp"

namespace logmaint {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Vocabulary {
  std::vector<std::string> terms;  // column order = first occurrence in corpus order
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> document_frequency;  // parallel to terms

  std::size_t size() const noexcept { return terms.size(); }

  std::size_t add(const std::string& term, std::size_t df) {
    const auto [it, inserted] = index.emplace(term, terms.size());
    if (inserted) {
      terms.push_back(term);
      document_frequency.push_back(df);
    }
    return it->second;
  }
};

/// TF-IDF weights, one L2-normalized row per document (zero rows for empty documents).
struct DocumentTermMatrix {
  SparseRowMatrix weights;
  std::vector<std::string> record_ids;

  Eigen::Index rows() const { return weights.rows(); }
  Eigen::Index cols() const { return weights.cols(); }
};

struct TfidfOptions {
  TokenField field = TokenField::lemma;
  std::size_t min_df = 2;
  bool sublinear_tf = false;  // 1 + log2(tf) instead of raw counts
};

struct TfidfResult {
  Vocabulary vocabulary;
  DocumentTermMatrix matrix;
  SparseRowMatrix counts;  // raw term counts over the same vocabulary
};

/// weight(d, t) = tf(d, t) * log2(N / df(t)), rows L2-normalized. Terms with
/// df < min_df, or present in every document (idf 0), are pruned.
inline TfidfResult build_tfidf(const std::vector<ProcessedDocument>& docs, const TfidfOptions& options = {}) {
  if (docs.empty()) throw Error("build_tfidf: no documents");
  if (options.min_df < 1) throw Error("build_tfidf: min_df must be >= 1");

  // Per-document term counts in first-occurrence order.
  struct DocCounts {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::size_t> tf;
  };
  std::vector<DocCounts> per_doc(docs.size());
  std::vector<std::string> first_seen;
  std::unordered_map<std::string, std::size_t> df;
  bool any_tokens = false;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto& dc = per_doc[d];
    for (const auto& t : docs[d].tokens) {
      const auto& term = field_of(t, options.field);
      any_tokens = true;
      if (dc.tf[term]++ == 0) {
        dc.order.push_back(term);
        if (df[term]++ == 0) first_seen.push_back(term);
      }
    }
  }
  if (!any_tokens) throw Error("build_tfidf: all documents empty");

  const auto n_docs = static_cast<double>(docs.size());
  TfidfResult r;
  for (const auto& term : first_seen) {
    const std::size_t f = df.at(term);
    if (f >= options.min_df && f < docs.size()) r.vocabulary.add(term, f);
  }
  if (r.vocabulary.size() == 0) throw Error("build_tfidf: all weights zero (every term pruned)");

  const auto rows = static_cast<Eigen::Index>(docs.size());
  const auto cols = static_cast<Eigen::Index>(r.vocabulary.size());
  std::vector<Eigen::Triplet<double>> w_trip, c_trip;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<std::pair<std::size_t, double>> row;
    double norm2 = 0.0;
    for (const auto& term : per_doc[d].order) {
      const auto it = r.vocabulary.index.find(term);
      if (it == r.vocabulary.index.end()) continue;
      const auto tf = static_cast<double>(per_doc[d].tf.at(term));
      const double idf = std::log2(n_docs / static_cast<double>(r.vocabulary.document_frequency[it->second]));
      const double w = (options.sublinear_tf ? 1.0 + std::log2(tf) : tf) * idf;
      row.emplace_back(it->second, w);
      norm2 += w * w;
      c_trip.emplace_back(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(it->second), tf);
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [col, w] : row)
      if (norm > 0) w_trip.emplace_back(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(col), w / norm);
  }
  r.matrix.weights.resize(rows, cols);
  r.matrix.weights.setFromTriplets(w_trip.begin(), w_trip.end());
  r.matrix.weights.makeCompressed();
  r.counts.resize(rows, cols);
  r.counts.setFromTriplets(c_trip.begin(), c_trip.end());
  r.counts.makeCompressed();
  r.matrix.record_ids.reserve(docs.size());
  for (const auto& d : docs) r.matrix.record_ids.push_back(d.record_id);
  return r;
}

// ---------------------------------------------------------------------------
// Latent semantic analysis

struct ReducedMatrix {
  Eigen::MatrixXd embedding;        // N x k, row i = U_i * diag(sigma)
  Eigen::VectorXd singular_values;  // k, non-increasing
  Eigen::MatrixXd components;       // k x |terms|, right singular vectors as rows
  std::size_t iterations = 0;       // subspace iterations used (0 for the dense route)

  Eigen::Index k() const { return singular_values.size(); }

  /// U * Sigma * V^T.
  Eigen::MatrixXd reconstruct() const { return embedding * components; }
};

enum class SvdMethod { automatic, dense, iterative };

struct LsaOptions {
  SvdMethod method = SvdMethod::automatic;
  double tolerance = 1e-10;
  std::size_t max_iterations = 1000;
  std::size_t dense_limit = 4'000'000;  // automatic picks dense up to this many cells
};

namespace detail {

/// Flips each singular pair so the largest-magnitude entry of the right
/// vector is positive (first such entry on ties).
inline void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a > best + 1e-12 * std::max(1.0, best)) {
        best = a;
        arg = r;
      }
    }
    if (v(arg, c) < 0) {
      v.col(c) *= -1.0;
      u.col(c) *= -1.0;
    }
  }
}

inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

inline ReducedMatrix assemble(Eigen::MatrixXd u, const Eigen::VectorXd& s, Eigen::MatrixXd v, Eigen::Index k) {
  Eigen::MatrixXd uk = u.leftCols(k);
  Eigen::MatrixXd vk = v.leftCols(k);
  canonicalize_signs(uk, vk);
  ReducedMatrix r;
  r.singular_values = s.head(k);
  r.embedding = uk * r.singular_values.asDiagonal();
  r.components = vk.transpose();
  return r;
}

inline ReducedMatrix lsa_dense(const SparseRowMatrix& a, Eigen::Index k) {
  const Eigen::MatrixXd dense(a);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return assemble(svd.matrixU(), svd.singularValues(), svd.matrixV(), k);
}

/// Block subspace iteration on the sparse matrix: Q spans A * Omega and is
/// refined through A A^T until the top-k singular values of Q^T A settle.
inline ReducedMatrix lsa_iterative(const SparseRowMatrix& a, Eigen::Index k, std::uint64_t seed,
                                   const LsaOptions& opt) {
  const Eigen::Index m = std::min(a.rows(), a.cols());
  const Eigen::Index block = std::min(m, k + std::max<Eigen::Index>(10, k));
  Rng rng(seed);
  Eigen::MatrixXd omega(a.cols(), block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < a.cols(); ++i) omega(i, j) = rng.normal();

  const SparseRowMatrix at = a.transpose();
  Eigen::MatrixXd q = orthonormal_basis(a * omega);
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(k, -1.0);
  Eigen::MatrixXd b;
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    b = (at * q).transpose();  // block x cols = Q^T A
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(b * b.transpose(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd s = gram.eigenvalues().reverse().head(k).cwiseMax(0.0).cwiseSqrt();
    const double scale = std::max(s(0), 1e-300);
    if (((s - prev).cwiseAbs().maxCoeff() / scale) <= opt.tolerance) break;
    prev = s;
    q = orthonormal_basis(a * orthonormal_basis(at * q));
  }
  b = (at * q).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto r = assemble(q * svd.matrixU(), svd.singularValues(), svd.matrixV(), k);
  r.iterations = it + 1;
  return r;
}

}  // namespace detail

/// Top-k singular triplets of the document-term matrix. The dense route is
/// exact up to rounding; the iterative route is seeded and deterministic.
inline ReducedMatrix lsa_reduce(const SparseRowMatrix& matrix, Eigen::Index k, std::uint64_t seed = 42,
                                const LsaOptions& options = {}) {
  const Eigen::Index bound = std::min(matrix.rows(), matrix.cols());
  if (k < 1 || k > bound)
    throw Error("lsa_reduce: k=" + std::to_string(k) + " outside 1.." + std::to_string(bound));
  SvdMethod method = options.method;
  if (method == SvdMethod::automatic)
    method = static_cast<double>(matrix.rows()) * static_cast<double>(matrix.cols()) <=
                     static_cast<double>(options.dense_limit)
                 ? SvdMethod::dense
                 : SvdMethod::iterative;
  return method == SvdMethod::dense ? detail::lsa_dense(matrix, k) : detail::lsa_iterative(matrix, k, seed, options);
}

inline ReducedMatrix lsa_reduce(const DocumentTermMatrix& matrix, Eigen::Index k, std::uint64_t seed = 42,
                                const LsaOptions& options = {}) {
  return lsa_reduce(matrix.weights, k, seed, options);
}

/// Default LSA dimensionality: min(100, min(N, |terms|)).
inline Eigen::Index default_lsa_k(const SparseRowMatrix& m) {
  return std::min<Eigen::Index>(100, std::min(m.rows(), m.cols()));
}

// ---------------------------------------------------------------------------
// Matrix file: JSON with the vocabulary, CSR triplets and a row-major embedding.

struct MatrixFile {
  std::vector<std::string> record_ids;
  Vocabulary vocabulary;
  SparseRowMatrix tfidf;
  SparseRowMatrix counts;
  std::optional<ReducedMatrix> lsa;
  TfidfOptions tfidf_options;
  std::uint64_t seed = 42;
};

namespace detail {

inline Json csr_to_json(const SparseRowMatrix& m, bool integral) {
  Json indptr = Json::array(), indices = Json::array(), values = Json::array();
  indptr.push_back(0);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseRowMatrix::InnerIterator it(m, r); it; ++it) {
      indices.push_back(it.col());
      if (integral)
        values.push_back(static_cast<std::int64_t>(std::llround(it.value())));
      else
        values.push_back(it.value());
    }
    indptr.push_back(indices.size());
  }
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["indptr"] = std::move(indptr);
  j["indices"] = std::move(indices);
  j["values"] = std::move(values);
  return j;
}

inline SparseRowMatrix csr_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& indptr = j.at("indptr");
  const auto& indices = j.at("indices");
  const auto& values = j.at("values");
  if (static_cast<Eigen::Index>(indptr.size()) != rows + 1 || indices.size() != values.size())
    throw Error("matrix file: inconsistent CSR arrays");
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto b = indptr[static_cast<std::size_t>(r)].get<std::size_t>();
    const auto e = indptr[static_cast<std::size_t>(r + 1)].get<std::size_t>();
    if (b > e || e > indices.size()) throw Error("matrix file: bad indptr");
    for (std::size_t i = b; i < e; ++i) {
      const auto c = indices[i].get<Eigen::Index>();
      if (c < 0 || c >= cols) throw Error("matrix file: column index out of range");
      trip.emplace_back(r, c, values[i].get<double>());
    }
  }
  SparseRowMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

inline Json dense_to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

inline Eigen::MatrixXd dense_from_json(const Json& a, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(a.size()) != rows * cols) throw Error("matrix file: dense block has wrong size");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

}  // namespace detail

inline Json to_json(const MatrixFile& mf) {
  Json j;
  j["format"] = "logmaint-matrix";
  j["version"] = 1;
  j["token_field"] = std::string(to_string(mf.tfidf_options.field));
  j["min_df"] = mf.tfidf_options.min_df;
  j["sublinear_tf"] = mf.tfidf_options.sublinear_tf;
  j["record_ids"] = mf.record_ids;
  j["vocabulary"] = mf.vocabulary.terms;
  j["document_frequency"] = mf.vocabulary.document_frequency;
  j["tfidf"] = detail::csr_to_json(mf.tfidf, false);
  j["counts"] = detail::csr_to_json(mf.counts, true);
  if (mf.lsa) {
    Json l;
    l["k"] = mf.lsa->k();
    l["seed"] = mf.seed;
    l["iterations"] = mf.lsa->iterations;
    l["singular_values"] = detail::dense_to_json(mf.lsa->singular_values.transpose());
    l["embedding"] = detail::dense_to_json(mf.lsa->embedding);
    l["components"] = detail::dense_to_json(mf.lsa->components);
    j["lsa"] = std::move(l);
  } else {
    j["lsa"] = nullptr;
  }
  return j;
}

inline MatrixFile matrix_file_from_json(const Json& j) {
  if (j.value("format", "") != "logmaint-matrix") throw Error("not a logmaint matrix file");
  MatrixFile mf;
  mf.tfidf_options.field = parse_token_field(j.at("token_field").get<std::string>());
  mf.tfidf_options.min_df = j.at("min_df").get<std::size_t>();
  mf.tfidf_options.sublinear_tf = j.at("sublinear_tf").get<bool>();
  mf.record_ids = j.at("record_ids").get<std::vector<std::string>>();
  const auto terms = j.at("vocabulary").get<std::vector<std::string>>();
  const auto dfs = j.at("document_frequency").get<std::vector<std::size_t>>();
  if (terms.size() != dfs.size()) throw Error("matrix file: vocabulary and df lengths differ");
  for (std::size_t i = 0; i < terms.size(); ++i) mf.vocabulary.add(terms[i], dfs[i]);
  mf.tfidf = detail::csr_from_json(j.at("tfidf"));
  mf.counts = detail::csr_from_json(j.at("counts"));
  if (mf.tfidf.rows() != static_cast<Eigen::Index>(mf.record_ids.size()) ||
      mf.tfidf.cols() != static_cast<Eigen::Index>(terms.size()))
    throw Error("matrix file: shape does not match ids/vocabulary");
  if (const auto& l = j.at("lsa"); !l.is_null()) {
    ReducedMatrix r;
    const auto k = l.at("k").get<Eigen::Index>();
    mf.seed = l.at("seed").get<std::uint64_t>();
    r.iterations = l.at("iterations").get<std::size_t>();
    r.singular_values = detail::dense_from_json(l.at("singular_values"), 1, k).transpose();
    r.embedding = detail::dense_from_json(l.at("embedding"), mf.tfidf.rows(), k);
    r.components = detail::dense_from_json(l.at("components"), k, mf.tfidf.cols());
    mf.lsa = std::move(r);
  }
  return mf;
}

inline MatrixFile load_matrix_file(const std::string& path) {
  try {
    return matrix_file_from_json(Json::parse(detail::read_file(path)));
  } catch (const Json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace logmaint
