#include "rtlr/low_rank.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rtlr/sweep.hpp"

namespace rtlr {

std::uint64_t SubsampleRng::draw_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("draw_below: empty range");
  std::uint64_t mask = ~std::uint64_t{0};
  std::uint64_t limit = n - 1;
  int bits = 0;
  while (limit >> bits) ++bits;
  mask = (bits >= 64) ? mask : ((std::uint64_t{1} << bits) - 1);
  std::uint64_t v;
  do {
    v = engine_() & mask;
  } while (v >= n);
  return v;
}

std::vector<int> SubsampleRng::sample_without_replacement(std::vector<int> pool, int count) {
  count = std::min<int>(count, static_cast<int>(pool.size()));
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(draw_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

LowRankBasis::LowRankBasis(const DiscreteOperators& ops, const AngularQuadrature& quad,
                           const BoundaryData& bc, Vector rhs_core)
    : ops_(&ops), quad_(&quad), bc_(&bc), rhs_core_(std::move(rhs_core)) {
  ensure_capacity(16, 16);
}

void LowRankBasis::ensure_capacity(int rank_needed, int snaps_needed) {
  const int n = ops_->space.size();
  const int rcap = static_cast<int>(x_.cols());
  if (rank_needed > rcap) {
    int grown = std::max({rank_needed, 2 * rcap, 16});
    x_.conservativeResize(n, grown);
    prhs_.conservativeResize(grown);
    for (Matrix* m : {&pdxm_, &pdxp_, &pdym_, &pdyp_, &pst_})
      m->conservativeResize(grown, grown);
    const int old_rows = static_cast<int>(rec_.rows());
    rec_.conservativeResize(grown, rec_.cols());
    rec_.bottomRows(grown - old_rows).setZero();
  }
  if (snaps_needed > rec_.cols()) {
    const int old = static_cast<int>(rec_.cols());
    int grown = std::max({snaps_needed, 2 * old, 16});
    rec_.conservativeResize(rec_.rows(), grown);
    rec_.rightCols(grown - old).setZero();
  }
}

bool LowRankBasis::mgs_ro_update(const Matrix& snapshots, const std::vector<int>& angles,
                                 double eps_mgs, double drop_tol) {
  const int n = ops_->space.size();
  const int p_in = static_cast<int>(snapshots.cols());
  if (static_cast<int>(angles.size()) != p_in)
    throw std::invalid_argument("mgs_ro_update: angle/snapshot count mismatch");
  prev_rank_ = rank_;
  const int m0 = n_snap_;
  ensure_capacity(rank_ + p_in, n_snap_ + p_in);

  Matrix accepted(n, p_in);
  int n_acc = 0;
  Vector chat, correction, remainder;
  for (int i = 0; i < p_in; ++i) {
    remainder = snapshots.col(i);
    const double norm0 = remainder.norm();
    if (rank_ > 0) {
      auto x = x_.leftCols(rank_);
      chat.noalias() = x.transpose() * snapshots.col(i);
      remainder.noalias() -= x * chat;
      // Cancellation leaves the remainder's orthogonality at eps * norm0 /
      // ||remainder||; one corrective projection pass restores it to eps
      // whenever significant mass was removed ("twice is enough").
      if (remainder.norm() < 0.5 * norm0) {
        correction.noalias() = x.transpose() * remainder;
        remainder.noalias() -= x * correction;
        chat += correction;
      }
      rec_.block(0, n_snap_, rank_, 1) = chat;
    }
    const double h = remainder.norm();
    if (norm0 > 0.0 && h > drop_tol * norm0) {
      x_.col(rank_) = remainder / h;
      rec_(rank_, n_snap_) = h;
      accepted.col(n_acc++) = snapshots.col(i);
      ++rank_;
    }
    sampled_.push_back(angles[i]);
    ++n_snap_;
  }

  bool reorthogonalized = false;
  if (rank_ > prev_rank_ && rank_ >= 2) {
    const double overlap = std::abs(x_.col(0).dot(x_.col(rank_ - 1)));
    reorthogonalized = overlap > eps_mgs;
  }
  if (reorthogonalized) {
    const int r_new = prev_rank_ + n_acc;
    Matrix m(n, r_new);
    m.leftCols(prev_rank_) = x_.leftCols(prev_rank_);
    m.rightCols(n_acc) = accepted.leftCols(n_acc);
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix thin_q = qr.householderQ() * Matrix::Identity(n, r_new);
    Matrix r_factor = Matrix(qr.matrixQR().topRows(r_new).triangularView<Eigen::Upper>());

    Matrix old_rec = rec_.topLeftCorner(prev_rank_, m0);
    rank_ = r_new;
    rec_.topLeftCorner(rank_, n_snap_).setZero();
    if (m0 > 0 && prev_rank_ > 0)
      rec_.topLeftCorner(rank_, m0) = r_factor.leftCols(prev_rank_) * old_rec;
    // Batch coefficients against the rebuilt basis (exact: the snapshots
    // lie in its span).
    rec_.block(0, m0, rank_, p_in) = thin_q.transpose() * snapshots;
    x_.leftCols(rank_) = thin_q;
  }
  return reorthogonalized;
}

namespace {

void border_extend(Matrix& proj, const SparseMatrix& a, Eigen::Ref<const Matrix> x0,
                   Eigen::Ref<const Matrix> pn) {
  const int r0 = static_cast<int>(x0.cols());
  const int p = static_cast<int>(pn.cols());
  Matrix ap = a * pn;
  if (r0 > 0) {
    proj.block(0, r0, r0, p).noalias() = x0.transpose() * ap;
    Matrix atp = a.transpose() * pn;
    proj.block(r0, 0, p, r0).noalias() = atp.transpose() * x0;
  }
  proj.block(r0, r0, p, p).noalias() = pn.transpose() * ap;
}

}  // namespace

void LowRankBasis::update_projections(bool reorthogonalized) {
  if (!reorthogonalized) {
    const int p_new = rank_ - prev_rank_;
    if (p_new <= 0) return;  // every snapshot was dropped
    auto x0 = x_.leftCols(prev_rank_);
    auto pn = x_.middleCols(prev_rank_, p_new);
    border_extend(pdxm_, ops_->d_x_minus, x0, pn);
    border_extend(pdxp_, ops_->d_x_plus, x0, pn);
    border_extend(pdym_, ops_->d_y_minus, x0, pn);
    border_extend(pdyp_, ops_->d_y_plus, x0, pn);
    border_extend(pst_, ops_->sigma_t, x0, pn);
    prhs_.segment(prev_rank_, p_new).noalias() = pn.transpose() * rhs_core_;
    return;
  }
  auto x = x_.leftCols(rank_);
  const SparseMatrix* mats[] = {&ops_->d_x_minus, &ops_->d_x_plus, &ops_->d_y_minus,
                                &ops_->d_y_plus, &ops_->sigma_t};
  Matrix* projs[] = {&pdxm_, &pdxp_, &pdym_, &pdyp_, &pst_};
  for (int i = 0; i < 5; ++i) {
    Matrix ax = *mats[i] * x;
    projs[i]->topLeftCorner(rank_, rank_).noalias() = x.transpose() * ax;
  }
  prhs_.head(rank_).noalias() = x.transpose() * rhs_core_;
}

Matrix LowRankBasis::reduced_streaming(int angle) const {
  const double omx = quad_->omega_x(angle);
  const double omy = quad_->omega_y(angle);
  const auto& px = omx >= 0.0 ? pdxm_ : pdxp_;
  const auto& py = omy >= 0.0 ? pdym_ : pdyp_;
  return omx * px.topLeftCorner(rank_, rank_) + omy * py.topLeftCorner(rank_, rank_) +
         pst_.topLeftCorner(rank_, rank_);
}

Vector LowRankBasis::reduced_rhs(int angle) const {
  Vector r = prhs_.head(rank_);
  if (const Vector* g = bc_->get(angle))
    r.noalias() += x_.leftCols(rank_).transpose() * *g;
  return r;
}

Vector LowRankBasis::galerkin_solve(int angle) const {
  if (rank_ < 1) throw std::runtime_error("galerkin_solve: empty basis");
  Matrix a = reduced_streaming(angle);
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector c = lu.solve(reduced_rhs(angle));
  if (!c.allFinite())
    throw std::runtime_error("galerkin_solve: singular reduced system");
  return c;
}

Vector LowRankBasis::residual(int angle, const Vector& c) const {
  Vector y = x_.leftCols(rank_) * c;
  StreamingOperator op = upwind_combination(*ops_, *quad_, angle);
  Vector r = rhs_core_ - op.apply(y);
  if (const Vector* g = bc_->get(angle)) r += *g;
  return r;
}

double LowRankBasis::residual_in_full_space(int angle, const Vector& y) const {
  StreamingOperator op = upwind_combination(*ops_, *quad_, angle);
  Vector r = rhs_core_ - op.apply(y);
  if (const Vector* g = bc_->get(angle)) r += *g;
  return r.norm();
}

SubsampleOutcome greedy_subsample(const LowRankBasis& basis,
                                  const std::vector<char>& sampled_mask,
                                  int p, int q, SubsampleRng& rng) {
  std::vector<int> pool;
  for (int j = 0; j < static_cast<int>(sampled_mask.size()); ++j)
    if (!sampled_mask[j]) pool.push_back(j);

  SubsampleOutcome out;
  if (pool.empty()) return out;
  out.candidates = rng.sample_without_replacement(std::move(pool), q);

  const int m = static_cast<int>(out.candidates.size());
  out.candidate_solutions.resize(m);
  out.residual_norms.resize(m);
  Matrix stacked(basis.rank(), m);
  for (int i = 0; i < m; ++i) {
    out.candidate_solutions[i] = basis.galerkin_solve(out.candidates[i]);
    stacked.col(i) = out.candidate_solutions[i];
  }
  Matrix expanded = basis.basis() * stacked;
  for (int i = 0; i < m; ++i)
    out.residual_norms[i] = basis.residual_in_full_space(out.candidates[i], expanded.col(i));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (out.residual_norms[a] != out.residual_norms[b])
      return out.residual_norms[a] > out.residual_norms[b];
    return out.candidates[a] < out.candidates[b];
  });
  out.max_residual = out.residual_norms[order.front()];
  const int take = std::min(p, m);
  out.selected.reserve(take);
  for (int i = 0; i < take; ++i) out.selected.push_back(out.candidates[order[i]]);
  return out;
}

int truncation_rank(const Vector& singular_values, double eps_svd) {
  const int n = static_cast<int>(singular_values.size());
  if (n == 0) return 0;
  const double total = singular_values.sum();
  if (!(total > 0.0)) return 1;
  const double tol = eps_svd * total;
  double tail = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    tail += singular_values[i];
    if (tail > tol) return i + 1;
  }
  return 1;
}

LowRankFactors truncate_factors(const Matrix& coefficients,
                                Eigen::Ref<const Matrix> basis, double eps_svd) {
  Eigen::BDCSVD<Matrix> svd(coefficients, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int r = truncation_rank(svd.singularValues(), eps_svd);
  LowRankFactors f;
  f.S = svd.singularValues().head(r);
  f.X = basis * svd.matrixU().leftCols(r);
  f.V = svd.matrixV().leftCols(r);
  return f;
}

namespace {

// Residual norms  ||rhs_j - (D_j + Sigma_t) X c_j||  for the listed angles,
// expanded block-wise so the tall products run as gemms.
std::vector<double> batched_residual_norms(const LowRankBasis& basis,
                                           const DiscreteOperators& ops,
                                           const AngularQuadrature& quad,
                                           const BoundaryData& bc,
                                           const std::vector<int>& angles,
                                           const Matrix& coefficients) {
  const int m = static_cast<int>(angles.size());
  const int block = 128;
  std::vector<double> norms(m);
  Matrix coeff_block, expanded;
  for (int i0 = 0; i0 < m; i0 += block) {
    const int nb = std::min(block, m - i0);
    coeff_block.resize(basis.rank(), nb);
    for (int i = 0; i < nb; ++i) coeff_block.col(i) = coefficients.col(angles[i0 + i]);
    expanded.noalias() = basis.basis() * coeff_block;
    for (int i = 0; i < nb; ++i) {
      const int j = angles[i0 + i];
      StreamingOperator op = upwind_combination(ops, quad, j);
      Vector r = basis.full_rhs_core() - op.apply(expanded.col(i));
      if (const Vector* g = bc.get(j)) r += *g;
      norms[i0 + i] = r.norm();
    }
  }
  return norms;
}

// Reduced solutions for every angle: sampled columns come straight from the
// coefficient record, candidates are reused, the rest are Galerkin solves.
Matrix build_full_coefficients(const LowRankBasis& basis,
                               const std::vector<char>& sampled_mask,
                               const SubsampleOutcome* reuse) {
  const int n_omega = static_cast<int>(sampled_mask.size());
  const int r = basis.rank();
  Matrix c(r, n_omega);
  std::vector<char> done(n_omega, 0);
  const auto& angles = basis.sampled_angles();
  auto rec = basis.coefficient_record();
  for (int i = 0; i < static_cast<int>(angles.size()); ++i) {
    c.col(angles[i]) = rec.col(i);
    done[angles[i]] = 1;
  }
  if (reuse) {
    for (int i = 0; i < static_cast<int>(reuse->candidates.size()); ++i) {
      int j = reuse->candidates[i];
      if (!done[j]) {
        c.col(j) = reuse->candidate_solutions[i];
        done[j] = 1;
      }
    }
  }
  for (int j = 0; j < n_omega; ++j)
    if (!done[j]) c.col(j) = basis.galerkin_solve(j);
  return c;
}

}  // namespace

InnerLoopResult low_rank_si(const DiscreteOperators& ops, const AngularQuadrature& quad,
                            const BoundaryData& bc, const Vector& source,
                            const Vector& phi_prev, const LowRankParams& params,
                            SubsampleRng& rng) {
  if (params.p < 1 || params.q < params.p)
    throw std::invalid_argument("low_rank_si: need 1 <= p <= q");
  const int n_omega = quad.size();
  const int n = ops.space.size();

  Vector rhs_core = ops.sigma_s * phi_prev + source;
  LowRankBasis basis(ops, quad, bc, rhs_core);
  std::vector<char> sampled(n_omega, 0);

  InnerLoopResult out;
  Vector phi_old = phi_prev;

  std::vector<int> all(n_omega);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> next = rng.sample_without_replacement(all, std::min(params.p, n_omega));

  Matrix snaps(n, params.p);
  Vector rhs(n);
  while (true) {
    ++out.iterations;

    const int p_now = static_cast<int>(next.size());
    snaps.resize(n, p_now);
    for (int i = 0; i < p_now; ++i) {
      const int j = next[i];
      rhs = rhs_core;
      if (const Vector* g = bc.get(j)) rhs += *g;
      snaps.col(i) = sweep(ops, quad, j, rhs);
      sampled[j] = 1;
      out.sampled_order.push_back(j);
    }
    bool reorth = basis.mgs_ro_update(snaps, next, params.eps_mgs);
    basis.update_projections(reorth);
    if (reorth) ++out.reorthogonalizations;

    const bool any_unsampled =
        std::any_of(sampled.begin(), sampled.end(), [](char s) { return !s; });
    if (!any_unsampled) {
      // Every angle has been swept: this step degenerates to full-rank SI.
      out.exhausted_all_angles = true;
      out.coefficients = build_full_coefficients(basis, sampled, nullptr);
      out.phi_star = basis.basis() * (out.coefficients * quad.weights);
      break;
    }

    SubsampleOutcome sub = greedy_subsample(basis, sampled, params.p, params.q, rng);
    next = sub.selected;

    if (sub.max_residual < params.eps_res) {
      Matrix c = build_full_coefficients(basis, sampled, &sub);
      Vector phi = basis.basis() * (c * quad.weights);
      if ((phi - phi_old).norm() <= params.eps_diff) {
        // Both gates hold, but the random candidate set can miss an angle
        // whose residual is still large (likely on coarse angular grids,
        // where a poorly covered direction has no well-sampled neighbour).
        // Accepting would freeze its wrong column into C, so verify every
        // unsampled angle against the gate before terminating and, on a
        // false positive, sweep the worst offenders next.
        std::vector<int> unsampled;
        for (int j = 0; j < n_omega; ++j)
          if (!sampled[j]) unsampled.push_back(j);
        std::vector<double> norms =
            batched_residual_norms(basis, ops, quad, bc, unsampled, c);
        std::vector<std::pair<double, int>> outstanding;
        for (std::size_t i = 0; i < unsampled.size(); ++i)
          if (norms[i] >= params.eps_res) outstanding.push_back({norms[i], unsampled[i]});
        if (outstanding.empty()) {
          out.phi_star = std::move(phi);
          out.coefficients = std::move(c);
          break;
        }
        // Sweep every offender in one batch: each is provably needed, and
        // batching keeps the expensive full reconstruction from re-running
        // once per added angle.
        std::sort(outstanding.begin(), outstanding.end(), [](const auto& a, const auto& b) {
          if (a.first != b.first) return a.first > b.first;
          return a.second < b.second;
        });
        next.clear();
        for (const auto& [res, angle] : outstanding) next.push_back(angle);
        ++out.verification_rejections;
      }
      phi_old = std::move(phi);
    }
  }

  out.rank = basis.rank();
  out.sampled_count = basis.snapshot_count();
  out.basis = basis.basis();
  return out;
}

SolveReport solve_low_rank(const DiscreteOperators& ops, const AngularQuadrature& quad,
                           const BoundaryData& bc, const Vector& source,
                           const DiffusionSystem* dsa, const LowRankOptions& opts) {
  if (opts.use_dsa && dsa == nullptr)
    throw std::invalid_argument("solve_low_rank: DSA requested but no diffusion system");
  const int n = ops.space.size();
  const int n_omega = quad.size();

  SolveReport report;
  report.method = "lowrank";
  SubsampleRng rng(opts.seed);

  auto t0 = std::chrono::steady_clock::now();

  Vector phi = Vector::Zero(n);
  InnerLoopResult inner;
  int final_rank = 0;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    inner = low_rank_si(ops, quad, bc, source, phi, opts.inner, rng);

    Eigen::BDCSVD<Matrix> svd(inner.coefficients);
    const int rp = truncation_rank(svd.singularValues(), opts.inner.eps_svd);

    OuterRecord rec;
    rec.diff_two_norm = (inner.phi_star - phi).norm();
    rec.diff_inf_norm = (inner.phi_star - phi).lpNorm<Eigen::Infinity>();
    rec.rank = rp;
    rec.oversampling = rp > 0 ? static_cast<double>(inner.rank - rp) / rp : 0.0;
    rec.inner_iterations = inner.iterations;
    rec.sampled_count = inner.sampled_count;
    rec.fullrank_fallback = inner.exhausted_all_angles;
    report.history.push_back(rec);
    report.sampled_log.push_back(inner.sampled_order);
    report.iterations = it;
    final_rank = rp;

    if (rec.diff_inf_norm <= opts.eps_si_sa) {
      report.converged = true;
      phi = inner.phi_star;
      break;
    }
    if (opts.use_dsa)
      phi = inner.phi_star + dsa->correct(inner.phi_star, phi);
    else
      phi = inner.phi_star;
  }
  if (!report.converged) phi = inner.phi_star;

  auto t1 = std::chrono::steady_clock::now();
  report.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.phi = phi;
  report.psi_dofs = static_cast<long long>(final_rank) * (n + n_omega);
  if (opts.build_factors)
    report.factors = truncate_factors(inner.coefficients, inner.basis, opts.inner.eps_svd);
  return report;
}

}  // namespace rtlr
