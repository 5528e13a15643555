#include "kfplab/ims.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kfplab/errors.hpp"
#include "kfplab/test_functions.hpp"

namespace kfplab {

CutoffFamily trivial_cutoff(int d) {
  return {"trivial", [d](std::span<const double>) {
            CutoffSample s;
            s.index = 0;
            s.psi = 1.0;
            s.gradient = Eigen::VectorXd::Zero(d);
            return std::vector<CutoffSample>{s};
          }};
}

CutoffFamily two_bump_cutoff(double split, double width) {
  if (!(width > 0.0)) throw InputError("two-bump width must be positive");
  return {"two_bump", [split, width](std::span<const double> q) {
            if (q.size() != 1) throw InputError("two-bump cutoff is one-dimensional");
            // phi_l = theta((q - split + width) / (2 width)), phi_r = theta of the mirror
            Bump b;
            b.beta = 0.0;
            const double sl = (q[0] - split + width) / (2.0 * width);
            const double sr = (split + width - q[0]) / (2.0 * width);
            const double pl = b.value(sl), pr = b.value(sr);
            const double dl = b.d1(sl) / (2.0 * width), dr = -b.d1(sr) / (2.0 * width);
            const double s = pl * pl + pr * pr;
            const double ds = 2.0 * (pl * dl + pr * dr);
            const double f = 1.0 / std::sqrt(s), df = -0.5 * std::pow(s, -1.5) * ds;
            std::vector<CutoffSample> out;
            if (pl > 0.0) out.push_back({0, pl * f, Eigen::VectorXd::Constant(1, dl * f + pl * df), {}});
            if (pr > 0.0) out.push_back({1, pr * f, Eigen::VectorXd::Constant(1, dr * f + pr * df), {}});
            return out;
          }};
}

CutoffFamily partition_cutoff(const PartitionSpec& spec) {
  return {"partition", [&spec](std::span<const double> q) { return spec.evaluate(q, false); }};
}

namespace {

struct SampledCutoff {
  Eigen::VectorXd value;                // on the q-grid
  std::vector<Eigen::VectorXd> gradient;  // per axis
};

// phase-space vector scaled pointwise by a q-function
Eigen::VectorXd times_q(const Eigen::VectorXd& f, const Eigen::VectorXd& u, std::size_t pn) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index iq = 0; iq < f.size(); ++iq) {
    out.segment(iq * static_cast<Eigen::Index>(pn), static_cast<Eigen::Index>(pn)) =
        f[iq] * u.segment(iq * static_cast<Eigen::Index>(pn), static_cast<Eigen::Index>(pn));
  }
  return out;
}

}  // namespace

ImsReport ims_identity_check(const DerivativeBank& bank, const DiscreteGrid& grid, const CutoffFamily& family,
                             int trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be positive");
  const int d = grid.d;
  const DiscreteOperator k = assemble_kfp(bank, grid);
  const std::size_t nqd = grid.q_size(), pn = grid.p_size();

  std::map<std::size_t, SampledCutoff> cut;
  Eigen::VectorXd unity = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nqd));
  for (std::size_t iq = 0; iq < nqd; ++iq) {
    for (const auto& s : family.evaluate(grid.q_point(iq))) {
      auto [it, fresh] = cut.try_emplace(s.index);
      if (fresh) {
        it->second.value = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nqd));
        it->second.gradient.assign(d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nqd)));
      }
      it->second.value[static_cast<Eigen::Index>(iq)] = s.psi;
      for (int i = 0; i < d; ++i) it->second.gradient[i][static_cast<Eigen::Index>(iq)] = s.gradient[i];
      unity[static_cast<Eigen::Index>(iq)] += s.psi * s.psi;
    }
  }

  ImsReport rep;
  rep.grid = grid;
  rep.family = family.label;
  rep.cutoffs = cut.size();
  rep.trials = trials;
  rep.seed = seed;
  rep.unity_defect = (unity.array() - 1.0).abs().maxCoeff();

  std::vector<SparseMatrix> p_axis, d_axis;
  for (int i = 0; i < d; ++i) {
    p_axis.push_back(on_axis(hermite_position(grid.np), i, d, grid.np));
    d_axis.push_back(on_axis(first_derivative(grid.nq, grid.h(), grid.fd_order), i, d, grid.nq));
  }
  auto apply_p = [&](int i, const Eigen::VectorXd& u) {
    Eigen::VectorXd out(u.size());
    for (std::size_t iq = 0; iq < nqd; ++iq) {
      const auto off = static_cast<Eigen::Index>(iq * pn);
      out.segment(off, static_cast<Eigen::Index>(pn)) = p_axis[i] * u.segment(off, static_cast<Eigen::Index>(pn));
    }
    return out;
  };
  auto apply_dq = [&](int i, const Eigen::VectorXd& u) {
    // d_axis[i] ⊗ I_p on the q-major layout
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    for (Eigen::Index r = 0; r < d_axis[i].outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(d_axis[i], r); it; ++it) {
        out.segment(r * static_cast<Eigen::Index>(pn), static_cast<Eigen::Index>(pn)) +=
            it.value() * u.segment(it.col() * static_cast<Eigen::Index>(pn), static_cast<Eigen::Index>(pn));
      }
    }
    return out;
  };

  const auto tests = smooth_phase_vectors(grid, trials, seed);
  for (const auto& u : tests) {
    const Eigen::VectorXd ku = k.matrix * u;
    const double lhs = ku.squaredNorm();
    double rhs = 0.0, commutator = 0.0;
    std::vector<Eigen::VectorXd> pu(d);
    for (int i = 0; i < d; ++i) pu[i] = apply_p(i, u);
    for (const auto& [j, c] : cut) {
      rhs += (k.matrix * times_q(c.value, u, pn)).squaredNorm();
      Eigen::VectorXd cont = Eigen::VectorXd::Zero(u.size());
      Eigen::VectorXd disc = Eigen::VectorXd::Zero(u.size());
      for (int i = 0; i < d; ++i) {
        cont += times_q(c.gradient[i], pu[i], pn);
        // [D, chi] p u = D(chi p u) - chi D(p u)
        disc += apply_dq(i, times_q(c.value, pu[i], pn)) - times_q(c.value, apply_dq(i, pu[i]), pn);
      }
      const double cn = cont.squaredNorm();
      rhs -= cn;
      commutator += disc.squaredNorm() - cn;
    }
    const double defect = rhs - lhs;
    rep.defects.push_back(lhs > 0.0 ? std::abs(defect) / lhs : std::abs(defect));
    rep.lhs.push_back(lhs);
    rep.commutator_parts.push_back(commutator / lhs);
    rep.cross_parts.push_back((defect - commutator) / lhs);
    rep.max_relative_defect = std::max(rep.max_relative_defect, rep.defects.back());
  }
  return rep;
}

ImsRefinement ims_refinement(const DerivativeBank& bank, const DiscreteGrid& base, const CutoffFamily& family,
                             std::span<const int> nq_list, int trials, std::uint64_t seed) {
  if (nq_list.size() < 2) throw InputError("refinement needs at least two grids");
  ImsRefinement out;
  std::vector<PowerSample> samples;
  for (int nq : nq_list) {
    DiscreteGrid g = base;
    g.nq = nq;
    out.runs.push_back(ims_identity_check(bank, g, family, trials, seed));
    samples.emplace_back(g.h(), out.runs.back().max_relative_defect);
  }
  for (std::size_t i = 0; i + 1 < out.runs.size(); ++i) {
    out.ratios.push_back(out.runs[i].max_relative_defect / out.runs[i + 1].max_relative_defect);
  }
  std::reverse(samples.begin(), samples.end());  // increasing h
  out.fit = loglog_regression(samples);
  out.order = out.fit.exponent;
  return out;
}

nlohmann::json to_json(const ImsReport& r) {
  return {{"grid", to_json(r.grid)},
          {"family", r.family},
          {"cutoffs", r.cutoffs},
          {"trials", r.trials},
          {"seed", r.seed},
          {"unity_defect", r.unity_defect},
          {"max_relative_defect", r.max_relative_defect},
          {"defects", r.defects},
          {"lhs", r.lhs},
          {"commutator_parts", r.commutator_parts},
          {"cross_parts", r.cross_parts}};
}

nlohmann::json to_json(const ImsRefinement& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& x : r.runs) runs.push_back(to_json(x));
  return {{"runs", runs}, {"ratios", r.ratios}, {"fit", to_json(r.fit)}, {"order", r.order}};
}

}  // namespace kfplab
