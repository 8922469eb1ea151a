#include "bdbc/blockstruct.hpp"

#include "bdbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace bdbc {

ColumnGrouping::ColumnGrouping(std::vector<int> assignment, int k)
    : assignment_(std::move(assignment)), k_(k) {
  if (k_ < 1) {
    throw InputError("column grouping needs k >= 1, got " + std::to_string(k_));
  }
  for (std::size_t j = 0; j < assignment_.size(); ++j) {
    if (assignment_[j] < 0 || assignment_[j] >= k_) {
      throw InputError("column grouping: variable " + std::to_string(j) + " has group id " +
                       std::to_string(assignment_[j]) + " outside [0, " +
                       std::to_string(k_) + ")");
    }
  }
}

ColumnGrouping ColumnGrouping::single(int p) {
  return ColumnGrouping(std::vector<int>(static_cast<std::size_t>(p), 0), 1);
}

ColumnGrouping ColumnGrouping::finest(int p) {
  std::vector<int> a(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    a[static_cast<std::size_t>(j)] = j;
  }
  return ColumnGrouping(std::move(a), std::max(p, 1));
}

ColumnGrouping ColumnGrouping::canonical(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> a;
  a.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    a.push_back(it->second);
  }
  return ColumnGrouping(std::move(a), std::max<int>(1, static_cast<int>(remap.size())));
}

void ColumnGrouping::assign(int j, int group) {
  if (group < 0 || group >= k_) {
    throw InputError("column grouping: group id out of range");
  }
  assignment_.at(static_cast<std::size_t>(j)) = group;
}

std::vector<std::vector<int>> ColumnGrouping::members() const {
  std::vector<std::vector<int>> m(static_cast<std::size_t>(k_));
  for (int j = 0; j < p(); ++j) {
    m[static_cast<std::size_t>(assignment_[static_cast<std::size_t>(j)])].push_back(j);
  }
  return m;
}

std::vector<int> ColumnGrouping::sizes() const {
  std::vector<int> s(static_cast<std::size_t>(k_), 0);
  for (int g : assignment_) {
    ++s[static_cast<std::size_t>(g)];
  }
  return s;
}

bool ColumnGrouping::has_empty_group() const {
  const auto s = sizes();
  return std::find(s.begin(), s.end(), 0) != s.end();
}

Matrix ColumnGrouping::indicator() const {
  Matrix d = Matrix::Zero(p(), k_);
  for (int j = 0; j < p(); ++j) {
    d(j, assignment_[static_cast<std::size_t>(j)]) = 1.0;
  }
  return d;
}

Matrix BlockCovariance::expanded() const {
  const int n = p();
  Matrix out = Matrix::Zero(n, n);
  const auto mem = grouping.members();
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const auto& idx = mem[k];
    for (std::size_t c = 0; c < idx.size(); ++c) {
      for (std::size_t r = 0; r < idx.size(); ++r) {
        out(idx[r], idx[c]) = blocks[k](static_cast<Index>(r), static_cast<Index>(c));
      }
    }
  }
  return out;
}

double BlockCovariance::log_det() const {
  double total = 0.0;
  for (const auto& b : blocks) {
    if (b.size() > 0) {
      total += RidgeCholesky(b).log_det();
    }
  }
  return total;
}

BlockCovariance project_block_diagonal(const Matrix& cov, const ColumnGrouping& grouping) {
  if (cov.rows() != cov.cols() || cov.rows() != grouping.p()) {
    throw InputError("project_block_diagonal: covariance is " + std::to_string(cov.rows()) +
                     "x" + std::to_string(cov.cols()) + " but grouping has p = " +
                     std::to_string(grouping.p()));
  }
  BlockCovariance out;
  out.grouping = grouping;
  for (const auto& idx : grouping.members()) {
    out.blocks.push_back(principal_submatrix(cov, idx));
  }
  return out;
}

double block_term(const Matrix& sample_cov, std::span<const int> members) {
  if (members.empty()) {
    return 0.0;
  }
  const Matrix block = principal_submatrix(sample_cov, members);
  const RidgeCholesky chol(block);
  const double trace = chol.ridge() == 0.0
                           ? static_cast<double>(members.size())
                           : chol.solve(block).trace();
  return -0.5 * chol.log_det() - 0.5 * trace;
}

double block_loglik(const Matrix& sample_cov, const ColumnGrouping& grouping) {
  if (sample_cov.rows() != sample_cov.cols() || sample_cov.rows() != grouping.p()) {
    throw InputError("block_loglik: dimension mismatch");
  }
  // B^-1 is block-diagonal, so only within-block entries of S reach the trace.
  double total = 0.0;
  for (const auto& idx : grouping.members()) {
    total += block_term(sample_cov, idx);
  }
  return total;
}

BlockGaussian::BlockGaussian(Vector mean, const BlockCovariance& cov)
    : mean_(std::move(mean)), members_(cov.grouping.members()) {
  if (mean_.size() != cov.p()) {
    throw InputError("BlockGaussian: mean and covariance dimensions differ");
  }
  factors_.reserve(cov.blocks.size());
  for (const auto& b : cov.blocks) {
    factors_.emplace_back(b);
    log_det_ += factors_.back().log_det();
  }
}

double BlockGaussian::logpdf(const Vector& x) const {
  double maha = 0.0;
  for (std::size_t k = 0; k < members_.size(); ++k) {
    const auto& idx = members_[k];
    if (idx.empty()) {
      continue;
    }
    Vector d(static_cast<Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      d[static_cast<Index>(r)] = x[idx[r]] - mean_[idx[r]];
    }
    maha += factors_[k].quad_form(d);
  }
  return -0.5 * static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) -
         0.5 * log_det_ - 0.5 * maha;
}

} // namespace bdbc
