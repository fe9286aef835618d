#include "mro/conic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <optional>
#include <thread>

namespace mro {

std::string cone_kind_name(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "second-order";
    case ConeKind::RotatedSecondOrder: return "rotated-second-order";
    case ConeKind::Power3D: return "power3d";
    case ConeKind::Exponential: return "exponential";
  }
  throw std::logic_error("bad ConeKind");
}

ConeKind cone_kind_from_name(const std::string& name) {
  if (name == "zero") return ConeKind::Zero;
  if (name == "nonneg") return ConeKind::Nonneg;
  if (name == "second-order") return ConeKind::SecondOrder;
  if (name == "rotated-second-order") return ConeKind::RotatedSecondOrder;
  if (name == "power3d") return ConeKind::Power3D;
  if (name == "exponential") return ConeKind::Exponential;
  throw std::invalid_argument("unknown cone kind: " + name);
}

std::string solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical-failure";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  throw std::logic_error("bad SolveStatus");
}

void ConicProgram::validate() const {
  if (objective.size() != num_vars) throw std::invalid_argument("objective size mismatch");
  for (const auto& blk : blocks) {
    if (blk.A.rows() != blk.c.size() || blk.A.cols() != num_vars) {
      throw std::invalid_argument("cone block dimension mismatch");
    }
    if (blk.kind == ConeKind::Power3D) {
      if (!(blk.alpha > 0.0 && blk.alpha < 1.0)) {
        throw std::invalid_argument("power3d alpha must be in (0,1)");
      }
      if (blk.rows() != 3) throw std::invalid_argument("power3d blocks are 3-dimensional");
    }
    if (blk.kind == ConeKind::Exponential && blk.rows() != 3) {
      throw std::invalid_argument("exponential blocks are 3-dimensional");
    }
    if (blk.kind == ConeKind::SecondOrder && blk.rows() < 2) {
      throw std::invalid_argument("second-order blocks need >= 2 rows");
    }
    if (blk.kind == ConeKind::RotatedSecondOrder && blk.rows() < 3) {
      throw std::invalid_argument("rotated-second-order blocks need >= 3 rows");
    }
  }
  for (auto idx : binary_vars) {
    if (idx < 0 || idx >= num_vars) throw std::invalid_argument("binary index out of range");
  }
}

std::string ConicProgram::dump_json() const {
  nlohmann::json j;
  j["num_vars"] = num_vars;
  j["objective"] = std::vector<double>(objective.data(), objective.data() + objective.size());
  j["objective_offset"] = objective_offset;
  j["binary_vars"] = binary_vars;
  j["var_names"] = var_names;
  auto blocks_json = nlohmann::json::array();
  for (const auto& blk : blocks) {
    nlohmann::json bj;
    bj["kind"] = cone_kind_name(blk.kind);
    if (blk.kind == ConeKind::Power3D) bj["alpha"] = blk.alpha;
    bj["rows"] = blk.c.size();
    bj["c"] = std::vector<double>(blk.c.data(), blk.c.data() + blk.c.size());
    auto triplets = nlohmann::json::array();
    for (int col = 0; col < blk.A.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(blk.A, col); it; ++it) {
        triplets.push_back({it.row(), it.col(), it.value()});
      }
    }
    bj["A"] = std::move(triplets);
    blocks_json.push_back(std::move(bj));
  }
  j["blocks"] = std::move(blocks_json);
  return j.dump(2);
}

ConicProgram ConicProgram::load_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ConicProgram p;
  p.num_vars = j.at("num_vars").get<Eigen::Index>();
  const auto obj = j.at("objective").get<std::vector<double>>();
  p.objective = Eigen::Map<const Eigen::VectorXd>(obj.data(), static_cast<Eigen::Index>(obj.size()));
  p.objective_offset = j.value("objective_offset", 0.0);
  p.binary_vars = j.at("binary_vars").get<std::vector<Eigen::Index>>();
  p.var_names = j.at("var_names").get<std::vector<std::string>>();
  for (const auto& bj : j.at("blocks")) {
    ConeBlock blk;
    blk.kind = cone_kind_from_name(bj.at("kind").get<std::string>());
    blk.alpha = bj.value("alpha", 0.0);
    const auto c = bj.at("c").get<std::vector<double>>();
    blk.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    blk.A.resize(blk.c.size(), p.num_vars);
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& t : bj.at("A")) {
      trip.emplace_back(t[0].get<Eigen::Index>(), t[1].get<Eigen::Index>(), t[2].get<double>());
    }
    blk.A.setFromTriplets(trip.begin(), trip.end());
    p.blocks.push_back(std::move(blk));
  }
  p.validate();
  return p;
}

std::vector<Eigen::Index> ProgramBuilder::add_vars(const std::string& prefix, Eigen::Index count) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = add_var(prefix + "[" + std::to_string(i) + "]");
  return idx;
}

void ProgramBuilder::add_block(ConeKind kind, const std::vector<LinExpr>& rows, double alpha) {
  pending_.push_back({kind, alpha, rows});
}

void ProgramBuilder::set_objective(const LinExpr& e) { objective_ = e; }

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.num_vars = num_vars();
  p.var_names = names_;
  p.binary_vars = binary_;
  p.objective = Eigen::VectorXd::Zero(p.num_vars);
  for (const auto& [i, c] : objective_.terms) p.objective[i] += c;
  p.objective_offset = objective_.constant;
  // adjacent zero / nonneg rows collapse into one block: a stack of scalar
  // cones of the same kind is the same cone, and fewer blocks solve faster
  std::vector<PendingBlock> merged;
  for (const auto& pb : pending_) {
    const bool scalar_kind = pb.kind == ConeKind::Zero || pb.kind == ConeKind::Nonneg;
    if (scalar_kind && !merged.empty() && merged.back().kind == pb.kind) {
      auto& dst = merged.back().rows;
      dst.insert(dst.end(), pb.rows.begin(), pb.rows.end());
    } else {
      merged.push_back(pb);
    }
  }
  for (const auto& pb : merged) {
    ConeBlock blk;
    blk.kind = pb.kind;
    blk.alpha = pb.alpha;
    const auto nrows = static_cast<Eigen::Index>(pb.rows.size());
    blk.c = Eigen::VectorXd::Zero(nrows);
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index r = 0; r < nrows; ++r) {
      const auto& e = pb.rows[static_cast<size_t>(r)];
      blk.c[r] = e.constant;
      for (const auto& [i, c] : e.terms) {
        if (c != 0.0) trip.emplace_back(r, i, c);
      }
    }
    blk.A.resize(nrows, p.num_vars);
    blk.A.setFromTriplets(trip.begin(), trip.end());
    p.blocks.push_back(std::move(blk));
  }
  p.validate();
  return p;
}

namespace {

ConicProgram with_fixed_binaries(const ConicProgram& program, uint64_t bits) {
  ConicProgram sub = program;
  sub.binary_vars.clear();
  ConeBlock fix;
  fix.kind = ConeKind::Zero;
  const auto nb = static_cast<Eigen::Index>(program.binary_vars.size());
  fix.c = Eigen::VectorXd::Zero(nb);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < nb; ++i) {
    const double value = (bits >> i) & 1u ? 1.0 : 0.0;
    trip.emplace_back(i, program.binary_vars[static_cast<size_t>(i)], 1.0);
    fix.c[i] = -value;  // x_i - value == 0
  }
  fix.A.resize(nb, program.num_vars);
  fix.A.setFromTriplets(trip.begin(), trip.end());
  sub.blocks.push_back(std::move(fix));
  return sub;
}

}  // namespace

Solution solve_mixed_binary(const ConicProgram& program, const SolverBackend& backend,
                            const SolveOptions& opts, int enumeration_cap,
                            double* total_backend_time) {
  program.validate();
  const size_t nb = program.binary_vars.size();
  if (nb == 0) {
    Solution s = backend.solve(program, opts);
    if (total_backend_time) *total_backend_time += s.solve_time;
    return s;
  }
  if (static_cast<int>(nb) > enumeration_cap) {
    throw std::invalid_argument(
        "solve_mixed_binary: " + std::to_string(nb) + " binaries exceed the enumeration cap of " +
        std::to_string(enumeration_cap) + "; use the cutting-plane/heuristic path instead");
  }
  const uint64_t count = 1ull << nb;
  std::vector<Solution> results(count);
  std::vector<double> times(count, 0.0);

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> futures;
  std::atomic<uint64_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      // one subproblem buffer per worker; only the fixing right-hand side
      // changes between assignments
      ConicProgram sub = with_fixed_binaries(program, 0);
      for (uint64_t bits = next.fetch_add(1); bits < count; bits = next.fetch_add(1)) {
        auto& fix_c = sub.blocks.back().c;
        for (size_t i = 0; i < nb; ++i) fix_c[static_cast<Eigen::Index>(i)] = (bits >> i) & 1u ? -1.0 : 0.0;
        results[bits] = backend.solve(sub, opts);
        times[bits] = results[bits].solve_time;
      }
    }));
  }
  for (auto& f : futures) f.get();

  if (total_backend_time) {
    for (double t : times) *total_backend_time += t;
  }

  // Min by objective; ties toward the lexicographically smallest assignment,
  // which for (x_0, x_1, ...) read as a word is the smallest integer with
  // bit 0 as the most significant digit -- enumeration order already visits
  // assignments in that order when bits are mirrored, so compare explicitly.
  auto lex_key = [nb](uint64_t bits) {
    uint64_t key = 0;
    for (size_t i = 0; i < nb; ++i) key = (key << 1) | ((bits >> i) & 1u);
    return key;
  };
  std::optional<uint64_t> best;
  for (uint64_t bits = 0; bits < count; ++bits) {
    if (results[bits].status != SolveStatus::Optimal) continue;
    if (!best || results[bits].objective < results[*best].objective - 1e-12 ||
        (std::abs(results[bits].objective - results[*best].objective) <= 1e-12 &&
         lex_key(bits) < lex_key(*best))) {
      best = bits;
    }
  }
  if (!best) {
    Solution s;
    s.status = SolveStatus::Infeasible;
    s.backend = backend.id();
    return s;
  }
  return results[*best];
}

}  // namespace mro
