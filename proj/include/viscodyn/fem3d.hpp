#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "viscodyn/chain.hpp"
#include "viscodyn/load.hpp"

namespace viscodyn {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimensionless isotropic stiffness for unit shear modulus, Voigt order
// (xx, yy, zz, yz, xz, xy) with engineering shear strains:
//
//   D = lam_bar (1 x 1) + diag(2, 2, 2, 1, 1, 1),  lam_bar = 2 nu / (1 - 2 nu)
//
// The physical stiffness of chain branch p is G_p * D, so the whole chain
// shares one Poisson ratio and relaxes in shear only. Requires 0 < nu < 0.5
// (the matrix is symmetric positive definite on that range).
Matrix6 unit_shear_stiffness(double poisson);

enum class Support {
  None,         // no constraints; assemble() rejects this as singular
  FixBottom,    // clamp all three DOFs on the z = 0 face
  PatchRollers  // u_x = 0 on x = 0, u_y = 0 on y = 0, u_z = 0 on z = 0
};

enum class Face { XMin, XMax, YMin, YMax, ZMin, ZMax };

// Structured box of 8-node trilinear hexahedra. Nodes are numbered x-fastest:
// node (i, j, k) -> i + (nx+1) (j + (ny+1) k), DOFs interleaved (3n, 3n+1,
// 3n+2) = (ux, uy, uz).
struct FemModel {
  int nx = 1, ny = 1, nz = 1;           // elements per direction
  double lx = 1.0, ly = 1.0, lz = 1.0;  // box size [m]
  double density = 0.0;                 // [kg/m^3]
  double poisson = 0.3;
  MaxwellChain chain;                   // shear moduli [Pa]
  Support support = Support::FixBottom;
  Face traction_face = Face::ZMax;
  Eigen::Vector3d traction = Eigen::Vector3d::Zero();  // [N/m^2]
  LoadSignal load;  // dimensionless time profile scaling the traction

  int node_count() const { return (nx + 1) * (ny + 1) * (nz + 1); }
  int element_count() const { return nx * ny * nz; }
  int dof_count() const { return 3 * node_count(); }
  int node_index(int i, int j, int k) const {
    return i + (nx + 1) * (j + (ny + 1) * k);
  }
  Eigen::Vector3d node_position(int i, int j, int k) const;
  void validate() const;
};

struct FemAssembly {
  Eigen::SparseMatrix<double> mass;            // consistent, all DOFs
  Eigen::SparseMatrix<double> unit_stiffness;  // K1 for unit shear modulus
  Eigen::VectorXd traction_force;  // F_ext(t) = traction_force * load(t)
  std::vector<char> fixed;         // per-DOF Dirichlet flag
  std::vector<int> free_dofs;      // reduced index -> full DOF
  std::vector<int> reduced_index;  // full DOF -> reduced index, -1 if fixed
};

FemAssembly assemble(const FemModel& model);

struct FemState {
  double t = 0.0;
  Eigen::VectorXd u, v, a;  // full DOF vectors; fixed DOFs stay zero
  // Per-cell stresses, Voigt, indexed [(element * 8 + gauss_point) * P + p].
  std::vector<Vector6> cell_stress;
};

// Time stepper for the continuum problem. The same average-acceleration
// update as the single-mass solver, applied to the semi-discrete system
//
//   M u'' + G_inf K1 u + sum_p (internal cell stresses) = F_ext(t)
//
// with the cell stresses advanced per Gauss point by the exact one-step
// recursion. The effective operator M + (G_inf dt^2/4 + sum_p B_p) K1 is
// constant, so it is factored once (sparse LDLT) in the constructor.
class FemIntegrator {
 public:
  FemIntegrator(const FemModel& model, double dt);

  void step();
  const FemState& state() const { return state_; }
  const FemModel& model() const { return model_; }
  const FemAssembly& assembly() const { return assembly_; }
  double dt() const { return dt_; }
  std::size_t step_count() const { return step_count_; }

  // Total Cauchy stress at one Gauss point: G_inf D (B u) + sum_p sigma_p.
  Vector6 total_stress(int element, int gauss_point) const;

  // inf-norm over free DOFs of M a + f_int - F_ext(t), relative to the
  // force scale. Round-off small at every node by construction.
  double equilibrium_residual() const;

 private:
  Eigen::VectorXd internal_force() const;
  void gather(int element, const Eigen::VectorXd& x,
              Eigen::Matrix<double, 24, 1>& xe) const;

  FemModel model_;
  double dt_;
  StepCoefficients coeffs_;
  std::vector<double> stiffness_theta_hat_;  // G_p theta_hat_p per cell
  FemAssembly assembly_;
  // Element kinematics; identical for every element of the uniform grid.
  std::array<Eigen::Matrix<double, 6, 24>, 8> b_;        // strain-displacement
  std::array<Eigen::Matrix<double, 6, 24>, 8> d_times_b_;  // D * B
  double gauss_weight_;                                  // w |J| per point
  double accel_coeff_;  // G_inf dt^2/4 + sum_p accel_weight_p
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> effective_;
  FemState state_;
  std::size_t step_count_ = 0;
};

struct ProbeSeries {
  std::array<int, 3> node;                    // grid coordinates (i, j, k)
  std::vector<std::array<double, 3>> u;       // displacement per node time
};

struct FemRunResult {
  std::vector<double> times;
  std::vector<ProbeSeries> probes;
};

// Drives the integrator for round(t_max / dt) steps, recording the probes at
// every node. When snapshot_every > 0, on_snapshot fires at step 0, every
// multiple of snapshot_every, and the final step.
FemRunResult run_fem(
    const FemModel& model, double dt, double t_max,
    const std::vector<std::array<int, 3>>& probes,
    int snapshot_every = 0,
    const std::function<void(const FemIntegrator&, std::size_t step)>& on_snapshot = {});

// Legacy-ASCII VTK structured grid with displacement and velocity vectors.
void write_vtk_snapshot(const FemModel& model, const FemState& state,
                        std::ostream& out);

}  // namespace viscodyn
