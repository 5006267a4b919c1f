#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace safenav {

/// Dense strictly convex QP in z = (v, omega, delta):
///     minimize 1/2 z' M z + q' z   subject to   A z <= b.
struct QpProblem {
    Eigen::Matrix3d M;
    Eigen::Vector3d q;
    Eigen::Matrix<double, Eigen::Dynamic, 3> A;
    Eigen::VectorXd b;
};

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
    Eigen::Vector3d z = Eigen::Vector3d::Zero();
    QpStatus status = QpStatus::Optimal;
    std::vector<int> active_set;  // rows binding at the optimum (final working set)
    double objective = 0.0;
    int iterations = 0;
    // Phase-1 certificate: least achievable constraint violation, > feasibility
    // tolerance when status == Infeasible.
    double infeasibility = 0.0;
};

struct MalformedProblem : std::invalid_argument {
    explicit MalformedProblem(const std::string& what) : std::invalid_argument(what) {}
};

/// Primal active-set solver. Equality subproblems are solved in range space
/// with a Cholesky factor of M and a Cholesky factor of the working-set Schur
/// complement. When no feasible starting point is available, a phase-1
/// elastic problem min eps/2 (|z|^2 + s^2) + s  s.t.  Az - 1s <= b, s >= 0
/// (which always has a strictly feasible start) is solved by the same core.
class ActiveSetQp {
public:
    double feas_tol = 1e-8;
    double lambda_tol = 1e-10;
    int max_iterations = 200;

    QpSolution solve(const QpProblem& p, std::span<const int> warm_start = {}) const {
        validate(p);
        const int k = static_cast<int>(p.A.rows());
        QpSolution out;

        // Warm start: equality-solve on the previous active set; accept only a
        // full KKT point (unique global optimum by strict convexity).
        if (!warm_start.empty()) {
            std::vector<int> w;
            for (int i : warm_start) {
                if (i >= 0 && i < k && std::find(w.begin(), w.end(), i) == w.end()) {
                    w.push_back(i);
                }
            }
            if (w.size() <= 3) {
                Eigen::VectorXd z, lam;
                if (equality_solve(p.M, p.q, p.A, p.b, w, z, lam)) {
                    const bool primal_ok = ((p.A * z - p.b).array() <= feas_tol).all();
                    const bool dual_ok = w.empty() || lam.minCoeff() >= -lambda_tol;
                    if (primal_ok && dual_ok) {
                        out.z = z;
                        out.status = QpStatus::Optimal;
                        out.active_set = w;
                        std::sort(out.active_set.begin(), out.active_set.end());
                        out.objective = objective(p.M, p.q, z);
                        out.iterations = 1;
                        return out;
                    }
                }
            }
        }

        // Cold start: unconstrained minimum if feasible, otherwise phase 1.
        Eigen::LLT<Eigen::MatrixXd> llt(p.M);
        Eigen::VectorXd z0 = llt.solve(-p.q);
        int iters = 0;
        if (k > 0 && (p.A * z0 - p.b).maxCoeff() > 0.0) {
            double violation = 0.0;
            z0 = phase1(p, iters, violation);
            if (violation > feas_tol) {
                out.status = QpStatus::Infeasible;
                out.infeasibility = violation;
                out.iterations = iters;
                return out;
            }
        }

        std::vector<int> w;
        Eigen::VectorXd z = z0, lam;
        run_active_set(p.M, p.q, p.A, p.b, z, w, lam, iters);
        out.z = z;
        out.status = QpStatus::Optimal;
        out.active_set = w;
        std::sort(out.active_set.begin(), out.active_set.end());
        out.objective = objective(p.M, p.q, z);
        out.iterations = iters;
        return out;
    }

private:
    void validate(const QpProblem& p) const {
        if (!p.M.allFinite() || !p.q.allFinite() || !p.A.allFinite() || !p.b.allFinite()) {
            throw MalformedProblem("qp: non-finite entries");
        }
        if (p.A.rows() != p.b.size()) {
            throw MalformedProblem("qp: A and b row counts differ");
        }
        const double scale = std::max(1.0, p.M.cwiseAbs().maxCoeff());
        if ((p.M - p.M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw MalformedProblem("qp: M is not symmetric");
        }
        if (Eigen::LLT<Eigen::Matrix3d>(p.M).info() != Eigen::Success) {
            throw MalformedProblem("qp: M is not positive definite");
        }
    }

    static double objective(const Eigen::MatrixXd& M, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& z) {
        return 0.5 * z.dot(M * z) + q.dot(z);
    }

    // Solves min 1/2 z'Mz + q'z s.t. A_w z = b_w directly. False if the
    // working-set Schur complement is not numerically positive definite.
    static bool equality_solve(const Eigen::MatrixXd& M, const Eigen::VectorXd& q,
                               const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               const std::vector<int>& w, Eigen::VectorXd& z,
                               Eigen::VectorXd& lam) {
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (w.empty()) {
            z = llt.solve(-q);
            lam.resize(0);
            return true;
        }
        const int m = static_cast<int>(w.size());
        Eigen::MatrixXd B(M.rows(), m);
        Eigen::VectorXd bw(m);
        for (int j = 0; j < m; ++j) {
            B.col(j) = A.row(w[j]).transpose();
            bw[j] = b[w[j]];
        }
        const Eigen::MatrixXd X = llt.solve(B);
        const Eigen::MatrixXd S = B.transpose() * X;
        Eigen::LLT<Eigen::MatrixXd> sllt(S);
        if (sllt.info() != Eigen::Success) {
            return false;
        }
        const Eigen::VectorXd zu = llt.solve(-q);
        lam = sllt.solve(B.transpose() * zu - bw);
        z = zu - X * lam;
        const Eigen::VectorXd rho1 = -q - M * z - B * lam;
        const Eigen::VectorXd rho2 = bw - B.transpose() * z;
        const Eigen::VectorXd dlam = sllt.solve(B.transpose() * llt.solve(rho1) - rho2);
        lam += dlam;
        z += llt.solve(rho1 - B * dlam);
        return true;
    }

    // Primal active-set main loop from a feasible z with working set w.
    void run_active_set(const Eigen::MatrixXd& M, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        Eigen::VectorXd& z, std::vector<int>& w,
                        Eigen::VectorXd& lam, int& iters) const {
        const int k = static_cast<int>(A.rows());
        const int n = static_cast<int>(M.rows());
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        const int bland_after = max_iterations / 2;

        for (int iter = 0; iter < max_iterations; ++iter) {
            ++iters;
            // Direction d: min 1/2 d'Md + g'd s.t. A_w d = r_w, where the
            // residual r_w = b_w - A_w z re-centers drifted working rows.
            const Eigen::VectorXd g = M * z + q;
            Eigen::VectorXd d;
            const int m = static_cast<int>(w.size());
            if (m == 0) {
                d = llt.solve(-g);
                lam.resize(0);
            } else {
                Eigen::MatrixXd B(n, m);
                Eigen::VectorXd r(m);
                for (int j = 0; j < m; ++j) {
                    B.col(j) = A.row(w[j]).transpose();
                    r[j] = b[w[j]] - A.row(w[j]).dot(z);
                }
                const Eigen::MatrixXd X = llt.solve(B);
                const Eigen::MatrixXd S = B.transpose() * X;
                Eigen::LLT<Eigen::MatrixXd> sllt(S);
                if (sllt.info() != Eigen::Success) {
                    // The newest row is linearly dependent on the rest of the
                    // working set. Exchange: drop the oldest row whose removal
                    // restores independence; keep the newcomer (it is the one
                    // currently blocking). Plain pop would re-add it forever.
                    bool exchanged = false;
                    for (int j = 0; j + 1 < m && !exchanged; ++j) {
                        std::vector<int> trial = w;
                        trial.erase(trial.begin() + j);
                        Eigen::MatrixXd Bt(n, m - 1);
                        for (int c = 0; c < m - 1; ++c) {
                            Bt.col(c) = A.row(trial[c]).transpose();
                        }
                        const Eigen::MatrixXd St = Bt.transpose() * llt.solve(Bt);
                        if (Eigen::LLT<Eigen::MatrixXd>(St).info() == Eigen::Success) {
                            w = std::move(trial);
                            exchanged = true;
                        }
                    }
                    if (!exchanged) {
                        w.pop_back();
                    }
                    continue;
                }
                lam = sllt.solve(-(B.transpose() * llt.solve(g)) - r);
                d = -llt.solve(g + B * lam);
                // One step of iterative refinement on the KKT system; the
                // range-space formula loses ~1e-10 absolute accuracy when M
                // is small (phase 1) because r is dwarfed by B' M^{-1} g.
                const Eigen::VectorXd rho1 = -g - M * d - B * lam;
                const Eigen::VectorXd rho2 = r - B.transpose() * d;
                const Eigen::VectorXd dlam =
                    sllt.solve(B.transpose() * llt.solve(rho1) - rho2);
                lam += dlam;
                d += llt.solve(rho1 - B * dlam);
            }

            // Move along d; when the full step is taken, z lands on the
            // working-set subspace minimizer and lam holds its multipliers.
            bool at_subspace_opt;
            const double step_tol = 1e-11 * (1.0 + z.lpNorm<Eigen::Infinity>());
            if (d.lpNorm<Eigen::Infinity>() <= step_tol) {
                z += d;
                at_subspace_opt = true;
            } else {
                // Ratio test over rows not in the working set; ties go to
                // the lowest row index. The direction filter scales with
                // ||a_i|| ||d|| so that rows parallel to the working set
                // (a.d = 0 up to roundoff) never register as blocking.
                double alpha = 1.0;
                int blocker = -1;
                const double dnorm = d.norm();
                for (int i = 0; i < k; ++i) {
                    if (std::find(w.begin(), w.end(), i) != w.end()) continue;
                    const double ad = A.row(i).dot(d);
                    if (ad <= 1e-11 * (1.0 + A.row(i).norm() * dnorm)) continue;
                    const double slack = b[i] - A.row(i).dot(z);
                    const double r = std::max(slack, 0.0) / ad;
                    if (r < alpha - 1e-12) {
                        alpha = r;
                        blocker = i;
                    } else if (blocker >= 0 && r <= alpha + 1e-12 && i < blocker) {
                        blocker = i;
                    }
                }
                z += alpha * d;
                at_subspace_opt = blocker < 0;
                if (blocker >= 0) {
                    w.push_back(blocker);
                }
            }
            if (!at_subspace_opt) continue;

            if (m == 0 || lam.minCoeff() >= -lambda_tol) {
                return;
            }
            int drop = -1;
            if (iter > bland_after) {
                // Bland's rule: lowest index with a negative multiplier.
                int best_row = std::numeric_limits<int>::max();
                for (int j = 0; j < m; ++j) {
                    if (lam[j] < -lambda_tol && w[j] < best_row) {
                        best_row = w[j];
                        drop = j;
                    }
                }
            } else {
                double worst = -lambda_tol;
                for (int j = 0; j < m; ++j) {
                    if (lam[j] < worst) {
                        worst = lam[j];
                        drop = j;
                    }
                }
            }
            w.erase(w.begin() + drop);
        }
        throw std::runtime_error("qp: active-set iteration limit exceeded");
    }

    // Elastic phase 1 in (z, s): returns a point with violation <= feas_tol,
    // or the least violation found (the infeasibility certificate). Two
    // regularization levels keep the elastic distortion below feas_tol.
    Eigen::VectorXd phase1(const QpProblem& p, int& iters, double& violation) const {
        const int k = static_cast<int>(p.A.rows());
        const int n = 3;
        Eigen::VectorXd z = Eigen::LLT<Eigen::Matrix3d>(p.M).solve(-p.q);
        violation = (p.A * z - p.b).maxCoeff();

        for (double eps : {1e-6, 1e-10}) {
            Eigen::MatrixXd Me = Eigen::MatrixXd::Identity(n + 1, n + 1) * eps;
            Eigen::VectorXd qe = Eigen::VectorXd::Zero(n + 1);
            qe[n] = 1.0;
            Eigen::MatrixXd Ae(k + 1, n + 1);
            Eigen::VectorXd be(k + 1);
            Ae.topLeftCorner(k, n) = p.A;
            Ae.topRightCorner(k, 1).setConstant(-1.0);
            be.head(k) = p.b;
            Ae.row(k).setZero();
            Ae(k, n) = -1.0;  // s >= 0
            be[k] = 0.0;

            Eigen::VectorXd ze(n + 1);
            ze.head(n) = z;
            ze[n] = std::max(violation, 0.0) * (1.0 + 1e-3) + 1.0;
            std::vector<int> w;
            Eigen::VectorXd lam;
            run_active_set(Me, qe, Ae, be, ze, w, lam, iters);

            z = ze.head(n);
            violation = (p.A * z - p.b).maxCoeff();
            if (violation <= feas_tol) {
                return z;
            }
        }
        return z;
    }
};

}  // namespace safenav
