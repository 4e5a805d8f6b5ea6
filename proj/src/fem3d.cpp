#include "viscodyn/fem3d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "viscodyn/csv.hpp"

namespace viscodyn {

namespace {

// Local corner coordinates of the trilinear hex (VTK ordering): bottom quad
// counter-clockwise, then the top quad above it.
constexpr double kXi[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
constexpr double kEta[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
constexpr double kZeta[8] = {-1, -1, -1, -1, 1, 1, 1, 1};

// 2x2x2 Gauss points (weight 1 each), same ordering convention.
const double kGauss = 1.0 / std::sqrt(3.0);

void shape_gradients(double xi, double eta, double zeta, double hx, double hy,
                     double hz, Eigen::Matrix<double, 8, 3>& grad,
                     Eigen::Matrix<double, 8, 1>& shape) {
  // On an axis-aligned box element the Jacobian is diag(hx, hy, hz) / 2, so
  // global gradients are the local ones scaled by 2 / h.
  for (int a = 0; a < 8; ++a) {
    const double fx = 1.0 + kXi[a] * xi;
    const double fy = 1.0 + kEta[a] * eta;
    const double fz = 1.0 + kZeta[a] * zeta;
    shape(a) = 0.125 * fx * fy * fz;
    grad(a, 0) = 0.125 * kXi[a] * fy * fz * (2.0 / hx);
    grad(a, 1) = 0.125 * fx * kEta[a] * fz * (2.0 / hy);
    grad(a, 2) = 0.125 * fx * fy * kZeta[a] * (2.0 / hz);
  }
}

Eigen::Matrix<double, 6, 24> strain_matrix(const Eigen::Matrix<double, 8, 3>& grad) {
  // Voigt rows (xx, yy, zz, yz, xz, xy) with engineering shear strains.
  Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
  for (int a = 0; a < 8; ++a) {
    const double dx = grad(a, 0), dy = grad(a, 1), dz = grad(a, 2);
    b(0, 3 * a + 0) = dx;
    b(1, 3 * a + 1) = dy;
    b(2, 3 * a + 2) = dz;
    b(3, 3 * a + 1) = dz;
    b(3, 3 * a + 2) = dy;
    b(4, 3 * a + 0) = dz;
    b(4, 3 * a + 2) = dx;
    b(5, 3 * a + 0) = dy;
    b(5, 3 * a + 1) = dx;
  }
  return b;
}

// The 8 node grid offsets of element (i, j, k), VTK hexahedron order.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

void element_corner_nodes(const FemModel& model, int element, int nodes[8]) {
  const int k = element / (model.nx * model.ny);
  const int rem = element % (model.nx * model.ny);
  const int j = rem / model.nx;
  const int i = rem % model.nx;
  for (int a = 0; a < 8; ++a) {
    nodes[a] = model.node_index(i + kCorner[a][0], j + kCorner[a][1],
                                k + kCorner[a][2]);
  }
}

}  // namespace

Matrix6 unit_shear_stiffness(double poisson) {
  if (!(poisson > 0.0) || !(poisson < 0.5)) {
    throw std::invalid_argument("Poisson ratio must lie in (0, 0.5)");
  }
  const double lam_bar = 2.0 * poisson / (1.0 - 2.0 * poisson);
  Matrix6 d = Matrix6::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) d(r, c) = lam_bar;
    d(r, r) += 2.0;
    d(r + 3, r + 3) = 1.0;
  }
  return d;
}

Eigen::Vector3d FemModel::node_position(int i, int j, int k) const {
  return {lx * i / nx, ly * j / ny, lz * k / nz};
}

void FemModel::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument("grid needs at least one element per direction");
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0)) {
    throw std::invalid_argument("box dimensions must be positive");
  }
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw std::invalid_argument("density must be positive and finite");
  }
  if (!traction.allFinite()) {
    throw std::invalid_argument("traction must be finite");
  }
  unit_shear_stiffness(poisson);  // validates the Poisson range
}

FemAssembly assemble(const FemModel& model) {
  model.validate();
  const int n_dofs = model.dof_count();
  const double hx = model.lx / model.nx;
  const double hy = model.ly / model.ny;
  const double hz = model.lz / model.nz;
  const double det_j = hx * hy * hz / 8.0;

  // One element's matrices; every element of the uniform grid is identical.
  const Matrix6 d = unit_shear_stiffness(model.poisson);
  Eigen::Matrix<double, 24, 24> ke = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 24, 24> me = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 8, 3> grad;
  Eigen::Matrix<double, 8, 1> shape;
  for (int g = 0; g < 8; ++g) {
    shape_gradients(kGauss * kXi[g], kGauss * kEta[g], kGauss * kZeta[g], hx, hy,
                    hz, grad, shape);
    const Eigen::Matrix<double, 6, 24> b = strain_matrix(grad);
    ke += b.transpose() * d * b * det_j;
    const Eigen::Matrix<double, 8, 8> nn =
        model.density * det_j * (shape * shape.transpose());
    for (int a = 0; a < 8; ++a) {
      for (int bnode = 0; bnode < 8; ++bnode) {
        for (int dir = 0; dir < 3; ++dir) {
          me(3 * a + dir, 3 * bnode + dir) += nn(a, bnode);
        }
      }
    }
  }

  // Scatter the shared element matrices over the grid.
  std::vector<Eigen::Triplet<double>> km, mm;
  km.reserve(static_cast<std::size_t>(model.element_count()) * 24 * 24);
  mm.reserve(static_cast<std::size_t>(model.element_count()) * 24 * 24);
  int edof[24];
  for (int k = 0; k < model.nz; ++k) {
    for (int j = 0; j < model.ny; ++j) {
      for (int i = 0; i < model.nx; ++i) {
        for (int a = 0; a < 8; ++a) {
          const int node = model.node_index(i + kCorner[a][0], j + kCorner[a][1],
                                            k + kCorner[a][2]);
          for (int dir = 0; dir < 3; ++dir) edof[3 * a + dir] = 3 * node + dir;
        }
        for (int row = 0; row < 24; ++row) {
          for (int col = 0; col < 24; ++col) {
            km.emplace_back(edof[row], edof[col], ke(row, col));
            mm.emplace_back(edof[row], edof[col], me(row, col));
          }
        }
      }
    }
  }

  FemAssembly asm_out;
  asm_out.unit_stiffness.resize(n_dofs, n_dofs);
  asm_out.unit_stiffness.setFromTriplets(km.begin(), km.end());
  asm_out.mass.resize(n_dofs, n_dofs);
  asm_out.mass.setFromTriplets(mm.begin(), mm.end());

  // Consistent nodal forces of a uniform traction on one box face: each
  // corner of a face quad takes a quarter of the quad's load (the bilinear
  // shape functions integrate to area / 4).
  asm_out.traction_force = Eigen::VectorXd::Zero(n_dofs);
  auto add_face_quad = [&](int n0, int n1, int n2, int n3, double quad_area) {
    for (int node : {n0, n1, n2, n3}) {
      for (int dir = 0; dir < 3; ++dir) {
        asm_out.traction_force(3 * node + dir) +=
            0.25 * quad_area * model.traction(dir);
      }
    }
  };
  switch (model.traction_face) {
    case Face::XMin:
    case Face::XMax: {
      const int i = model.traction_face == Face::XMin ? 0 : model.nx;
      for (int k = 0; k < model.nz; ++k)
        for (int j = 0; j < model.ny; ++j)
          add_face_quad(model.node_index(i, j, k), model.node_index(i, j + 1, k),
                        model.node_index(i, j, k + 1),
                        model.node_index(i, j + 1, k + 1), hy * hz);
      break;
    }
    case Face::YMin:
    case Face::YMax: {
      const int j = model.traction_face == Face::YMin ? 0 : model.ny;
      for (int k = 0; k < model.nz; ++k)
        for (int i = 0; i < model.nx; ++i)
          add_face_quad(model.node_index(i, j, k), model.node_index(i + 1, j, k),
                        model.node_index(i, j, k + 1),
                        model.node_index(i + 1, j, k + 1), hx * hz);
      break;
    }
    case Face::ZMin:
    case Face::ZMax: {
      const int k = model.traction_face == Face::ZMin ? 0 : model.nz;
      for (int j = 0; j < model.ny; ++j)
        for (int i = 0; i < model.nx; ++i)
          add_face_quad(model.node_index(i, j, k), model.node_index(i + 1, j, k),
                        model.node_index(i, j + 1, k),
                        model.node_index(i + 1, j + 1, k), hx * hy);
      break;
    }
  }

  // Dirichlet flags.
  asm_out.fixed.assign(n_dofs, 0);
  auto fix = [&](int node, int dir) { asm_out.fixed[3 * node + dir] = 1; };
  switch (model.support) {
    case Support::None:
      break;
    case Support::FixBottom:
      for (int j = 0; j <= model.ny; ++j)
        for (int i = 0; i <= model.nx; ++i)
          for (int dir = 0; dir < 3; ++dir) fix(model.node_index(i, j, 0), dir);
      break;
    case Support::PatchRollers:
      // Symmetry rollers: each coordinate plane blocks its normal component.
      for (int k = 0; k <= model.nz; ++k)
        for (int j = 0; j <= model.ny; ++j) fix(model.node_index(0, j, k), 0);
      for (int k = 0; k <= model.nz; ++k)
        for (int i = 0; i <= model.nx; ++i) fix(model.node_index(i, 0, k), 1);
      for (int j = 0; j <= model.ny; ++j)
        for (int i = 0; i <= model.nx; ++i) fix(model.node_index(i, j, 0), 2);
      break;
  }

  asm_out.reduced_index.assign(n_dofs, -1);
  for (int dof = 0; dof < n_dofs; ++dof) {
    if (!asm_out.fixed[dof]) {
      asm_out.reduced_index[dof] = static_cast<int>(asm_out.free_dofs.size());
      asm_out.free_dofs.push_back(dof);
    }
  }
  if (asm_out.free_dofs.size() == static_cast<std::size_t>(n_dofs)) {
    throw AssemblyError(
        "no Dirichlet constraints: the undamped rigid modes make the system "
        "singular; pick a support");
  }
  return asm_out;
}

namespace {

Eigen::SparseMatrix<double> reduce(const Eigen::SparseMatrix<double>& full,
                                   const FemAssembly& assembly) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(full.nonZeros());
  for (int col = 0; col < full.outerSize(); ++col) {
    const int rc = assembly.reduced_index[col];
    if (rc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, col); it; ++it) {
      const int rr = assembly.reduced_index[it.row()];
      if (rr >= 0) trip.emplace_back(rr, rc, it.value());
    }
  }
  Eigen::SparseMatrix<double> out(assembly.free_dofs.size(),
                                  assembly.free_dofs.size());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Eigen::VectorXd reduce_vector(const Eigen::VectorXd& full,
                              const FemAssembly& assembly) {
  Eigen::VectorXd out(assembly.free_dofs.size());
  for (std::size_t i = 0; i < assembly.free_dofs.size(); ++i) {
    out(i) = full(assembly.free_dofs[i]);
  }
  return out;
}

void scatter_vector(const Eigen::VectorXd& reduced, const FemAssembly& assembly,
                    Eigen::VectorXd& full) {
  full.setZero();
  for (std::size_t i = 0; i < assembly.free_dofs.size(); ++i) {
    full(assembly.free_dofs[i]) = reduced(i);
  }
}

}  // namespace

FemIntegrator::FemIntegrator(const FemModel& model, double dt)
    : model_(model), dt_(dt), coeffs_(step_coefficients(model.chain, dt)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::domain_error("step size must be positive and finite");
  }
  assembly_ = assemble(model_);

  const double hx = model_.lx / model_.nx;
  const double hy = model_.ly / model_.ny;
  const double hz = model_.lz / model_.nz;
  gauss_weight_ = hx * hy * hz / 8.0;
  const Matrix6 d = unit_shear_stiffness(model_.poisson);
  Eigen::Matrix<double, 8, 3> grad;
  Eigen::Matrix<double, 8, 1> shape;
  for (int g = 0; g < 8; ++g) {
    shape_gradients(kGauss * kXi[g], kGauss * kEta[g], kGauss * kZeta[g], hx, hy,
                    hz, grad, shape);
    b_[g] = strain_matrix(grad);
    d_times_b_[g] = d * b_[g];
  }

  const std::size_t np = model_.chain.cell_count();
  stiffness_theta_hat_.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    stiffness_theta_hat_[p] = model_.chain.cells()[p].stiffness * coeffs_.theta_hat[p];
  }

  const double g_inf = model_.chain.long_term_stiffness();
  accel_coeff_ = 0.25 * g_inf * dt_ * dt_ + coeffs_.accel_weight_sum;

  const Eigen::SparseMatrix<double> m_red = reduce(assembly_.mass, assembly_);
  const Eigen::SparseMatrix<double> k_red =
      reduce(assembly_.unit_stiffness, assembly_);
  Eigen::SparseMatrix<double> eff = m_red + accel_coeff_ * k_red;
  effective_.compute(eff);
  if (effective_.info() != Eigen::Success) {
    throw AssemblyError("effective operator factorization failed");
  }

  // Initial state: at rest, so M a0 = F_ext(0).
  const int n_dofs = model_.dof_count();
  state_.t = 0.0;
  state_.u = Eigen::VectorXd::Zero(n_dofs);
  state_.v = Eigen::VectorXd::Zero(n_dofs);
  state_.a = Eigen::VectorXd::Zero(n_dofs);
  state_.cell_stress.assign(static_cast<std::size_t>(model_.element_count()) * 8 * np,
                            Vector6::Zero());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass_solver(m_red);
  if (mass_solver.info() != Eigen::Success) {
    throw AssemblyError("mass matrix factorization failed");
  }
  const Eigen::VectorXd f0 =
      reduce_vector(assembly_.traction_force * model_.load(0.0), assembly_);
  scatter_vector(mass_solver.solve(f0), assembly_, state_.a);
}

void FemIntegrator::gather(int element, const Eigen::VectorXd& x,
                           Eigen::Matrix<double, 24, 1>& xe) const {
  int nodes[8];
  element_corner_nodes(model_, element, nodes);
  for (int a = 0; a < 8; ++a) {
    xe.segment<3>(3 * a) = x.segment<3>(3 * nodes[a]);
  }
}

void FemIntegrator::step() {
  const std::size_t np = model_.chain.cell_count();
  const double g_inf = model_.chain.long_term_stiffness();
  const double t1 = static_cast<double>(step_count_ + 1) * dt_;

  // History force: integral of B^T (sum_p decay_p sigma_p).
  Eigen::VectorXd f_hist = Eigen::VectorXd::Zero(model_.dof_count());
  Eigen::Matrix<double, 24, 1> fe;
  int nodes[8];
  for (int e = 0; e < model_.element_count(); ++e) {
    fe.setZero();
    for (int g = 0; g < 8; ++g) {
      const Vector6* sig = &state_.cell_stress[(static_cast<std::size_t>(e) * 8 + g) * np];
      Vector6 s = Vector6::Zero();
      for (std::size_t p = 0; p < np; ++p) s += coeffs_.decay[p] * sig[p];
      fe += b_[g].transpose() * (gauss_weight_ * s);
    }
    element_corner_nodes(model_, e, nodes);
    for (int a = 0; a < 8; ++a) {
      f_hist.segment<3>(3 * nodes[a]) += fe.segment<3>(3 * a);
    }
  }

  const Eigen::VectorXd k_u = assembly_.unit_stiffness * state_.u;
  const Eigen::VectorXd k_v = assembly_.unit_stiffness * state_.v;
  const Eigen::VectorXd k_a = assembly_.unit_stiffness * state_.a;
  double sum_g_theta = 0.0;
  for (double gt : stiffness_theta_hat_) sum_g_theta += gt;

  const Eigen::VectorXd rhs_full =
      assembly_.traction_force * model_.load(t1) - f_hist - g_inf * k_u -
      (g_inf * dt_ + sum_g_theta) * k_v - accel_coeff_ * k_a;

  Eigen::VectorXd a_new(model_.dof_count());
  scatter_vector(effective_.solve(reduce_vector(rhs_full, assembly_)), assembly_,
                 a_new);

  const Eigen::VectorXd v_new = state_.v + 0.5 * dt_ * (state_.a + a_new);
  const Eigen::VectorXd u_new = state_.u + dt_ * state_.v +
                                0.25 * dt_ * dt_ * (state_.a + a_new);

  // Advance the cell stresses with the pre-update velocity and the
  // acceleration sum, mirroring the scalar recursion per Voigt component.
  Eigen::Matrix<double, 24, 1> ve, ae_sum;
  const Eigen::VectorXd a_sum_full = state_.a + a_new;
  for (int e = 0; e < model_.element_count(); ++e) {
    gather(e, state_.v, ve);
    gather(e, a_sum_full, ae_sum);
    for (int g = 0; g < 8; ++g) {
      const Vector6 d_vel = d_times_b_[g] * ve;      // D (B v_i)
      const Vector6 d_acc = d_times_b_[g] * ae_sum;  // D (B (a_i + a_{i+1}))
      Vector6* sig = &state_.cell_stress[(static_cast<std::size_t>(e) * 8 + g) * np];
      for (std::size_t p = 0; p < np; ++p) {
        sig[p] = coeffs_.decay[p] * sig[p] + stiffness_theta_hat_[p] * d_vel +
                 coeffs_.accel_weight[p] * d_acc;
      }
    }
  }

  state_.u = u_new;
  state_.v = v_new;
  state_.a = a_new;
  ++step_count_;
  state_.t = t1;
}

Vector6 FemIntegrator::total_stress(int element, int gauss_point) const {
  const std::size_t np = model_.chain.cell_count();
  Eigen::Matrix<double, 24, 1> ue;
  gather(element, state_.u, ue);
  Vector6 s = model_.chain.long_term_stiffness() * (d_times_b_[gauss_point] * ue);
  const Vector6* sig =
      &state_.cell_stress[(static_cast<std::size_t>(element) * 8 + gauss_point) * np];
  for (std::size_t p = 0; p < np; ++p) s += sig[p];
  return s;
}

Eigen::VectorXd FemIntegrator::internal_force() const {
  const std::size_t np = model_.chain.cell_count();
  Eigen::VectorXd f = model_.chain.long_term_stiffness() *
                      (assembly_.unit_stiffness * state_.u);
  Eigen::Matrix<double, 24, 1> fe;
  int nodes[8];
  for (int e = 0; e < model_.element_count(); ++e) {
    fe.setZero();
    for (int g = 0; g < 8; ++g) {
      const Vector6* sig = &state_.cell_stress[(static_cast<std::size_t>(e) * 8 + g) * np];
      Vector6 s = Vector6::Zero();
      for (std::size_t p = 0; p < np; ++p) s += sig[p];
      fe += b_[g].transpose() * (gauss_weight_ * s);
    }
    element_corner_nodes(model_, e, nodes);
    for (int a = 0; a < 8; ++a) {
      f.segment<3>(3 * nodes[a]) += fe.segment<3>(3 * a);
    }
  }
  return f;
}

double FemIntegrator::equilibrium_residual() const {
  const Eigen::VectorXd inertia = assembly_.mass * state_.a;
  const Eigen::VectorXd external = assembly_.traction_force * model_.load(state_.t);
  const Eigen::VectorXd residual = inertia + internal_force() - external;
  double worst = 0.0;
  double scale = 0.0;
  for (int dof : assembly_.free_dofs) {
    worst = std::max(worst, std::abs(residual(dof)));
    scale = std::max({scale, std::abs(inertia(dof)), std::abs(external(dof))});
  }
  return scale > 0.0 ? worst / scale : worst;
}

FemRunResult run_fem(
    const FemModel& model, double dt, double t_max,
    const std::vector<std::array<int, 3>>& probes, int snapshot_every,
    const std::function<void(const FemIntegrator&, std::size_t step)>& on_snapshot) {
  if (!(t_max >= dt)) {
    throw std::domain_error("t_max must cover at least one step");
  }
  FemIntegrator integrator(model, dt);
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));

  FemRunResult result;
  result.probes.resize(probes.size());
  for (std::size_t q = 0; q < probes.size(); ++q) {
    const auto& [i, j, k] = probes[q];
    if (i < 0 || i > model.nx || j < 0 || j > model.ny || k < 0 || k > model.nz) {
      throw std::invalid_argument("probe node lies outside the grid");
    }
    result.probes[q].node = probes[q];
  }

  auto record = [&](std::size_t step) {
    result.times.push_back(integrator.state().t);
    for (std::size_t q = 0; q < probes.size(); ++q) {
      const int node = model.node_index(probes[q][0], probes[q][1], probes[q][2]);
      const auto& u = integrator.state().u;
      result.probes[q].u.push_back({u(3 * node), u(3 * node + 1), u(3 * node + 2)});
    }
    const bool due = snapshot_every > 0 &&
                     (step % static_cast<std::size_t>(snapshot_every) == 0 ||
                      step == steps);
    if (due && on_snapshot) on_snapshot(integrator, step);
  };

  record(0);
  for (std::size_t i = 1; i <= steps; ++i) {
    integrator.step();
    record(i);
  }
  return result;
}

void write_vtk_snapshot(const FemModel& model, const FemState& state,
                        std::ostream& out) {
  const int n = model.node_count();
  out << "# vtk DataFile Version 3.0\n";
  out << "viscodyn snapshot t = " << full_precision(state.t) << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << model.nx + 1 << ' ' << model.ny + 1 << ' '
      << model.nz + 1 << "\n";
  out << "POINTS " << n << " double\n";
  for (int k = 0; k <= model.nz; ++k) {
    for (int j = 0; j <= model.ny; ++j) {
      for (int i = 0; i <= model.nx; ++i) {
        const Eigen::Vector3d x = model.node_position(i, j, k);
        out << full_precision(x(0)) << ' ' << full_precision(x(1)) << ' '
            << full_precision(x(2)) << "\n";
      }
    }
  }
  out << "POINT_DATA " << n << "\n";
  out << "VECTORS displacement double\n";
  for (int node = 0; node < n; ++node) {
    out << full_precision(state.u(3 * node)) << ' '
        << full_precision(state.u(3 * node + 1)) << ' '
        << full_precision(state.u(3 * node + 2)) << "\n";
  }
  out << "VECTORS velocity double\n";
  for (int node = 0; node < n; ++node) {
    out << full_precision(state.v(3 * node)) << ' '
        << full_precision(state.v(3 * node + 1)) << ' '
        << full_precision(state.v(3 * node + 2)) << "\n";
  }
}

}  // namespace viscodyn
