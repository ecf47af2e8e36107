#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/hopflax.hpp"
#include "hjlab/pathwise.hpp"

namespace hjlab {

// W = H''(Du) D^2u in one dimension
struct CurvatureProbe {
    GridFn w_values;
    double w_min, w_max;
    double h_slack;
    int stride;  // difference quotients taken over stride*h
    double h;
};

// ceil(sqrt(n/4)): the quotient spacing shrinks like h^(1/2)
int default_stride(int n);

// H'' at the centered gradient times the second difference quotient over stride*h
// (stride 0 picks default_stride); slack (Theta P + 1) 10h
CurvatureProbe curvature_w(const GridFn& u, const Hamiltonian& H, int stride = 0);
double curvature_slack(const Hamiltonian& H, double h);
// h_slack + 10h |bound|: curvature errors grow with the curvature itself
double report_slack(const CurvatureProbe& pr, double bound);

// a curvature constant that may be infinite (no semiconvexity assumed on the data)
class CurvatureConstant {
public:
    static CurvatureConstant infinite() { return CurvatureConstant(0.0, true); }
    static CurvatureConstant finite(double c);
    bool is_infinite() const { return inf_; }
    double value() const;

private:
    CurvatureConstant(double c, bool inf) : c_(c), inf_(inf) {}
    double c_;
    bool inf_;
};

// C/(1 + C t), exactly 1/t for C = infinity
double regularizing_bound(const CurvatureConstant& C, double t);
// C/(1 + theta C t), 1/(theta t) for C = infinity
double classical_regularizing_bound(const CurvatureConstant& C, double theta, double t);
// -C0/(1 - C0 t); only meaningful for C0 t < 1
double propagation_bound(double C0, double t);
// sqrt(2 |u| / (theta (M - m)))
double lipschitz_decay_bound(double sup_u, double theta, double range);

enum class Quantity { curvature_lower, curvature_upper, curvature_abs, lipschitz };
std::string to_string(Quantity q);

enum class FlowDirection { plus, minus };
FlowDirection parse_direction(const std::string& s);
std::string to_string(FlowDirection d);

struct EstimateReport {
    double time;
    Quantity quantity;
    double measured, bound, slack;
    bool pass;
    bool skipped = false;
    std::string reason;  // why a report was skipped
    double zeta = 0, M = 0, m = 0;
};

// lower bounds pass iff measured >= bound - slack, the others iff measured <= bound + slack
bool report_passes(Quantity q, double measured, double bound, double slack);

// Regularization along a single-sign flow: plus measures max(-W), minus measures max(W),
// against C0/(1 + C0 t) with t the elapsed increment |zeta(t)|.
std::vector<EstimateReport> check_regularizing(const Trajectory& traj, const Hamiltonian& H,
                                               const CurvatureConstant& C0, FlowDirection dir);

// initial constant for check_propagation: max(0, w_max) for plus, max(0, -w_min) for minus
double propagation_constant(const GridFn& u0, const Hamiltonian& H, FlowDirection dir);

// Propagation along a single-sign flow: plus measures min(-W) >= -C0/(1 - C0 t), minus
// measures min(W); reports at C0 t >= 1 are skipped as vacuous.
std::vector<EstimateReport> check_propagation(const Trajectory& traj, const Hamiltonian& H, double C0,
                                              FlowDirection dir);

// Two-sided curvature bounds at times with m(t) < zeta(t) < M(t), and the combined |W| bound.
std::vector<EstimateReport> check_intermittent(const Trajectory& traj, const Hamiltonian& H, const Path& p);

// Lipschitz constant against sqrt(2|u|/(theta (M - m))) with slack 4h times the bound; for a
// degenerate H against the constant of the previous snapshot.
std::vector<EstimateReport> check_lipschitz_decay(const Trajectory& traj, const Hamiltonian& H, const Path& p);

// 2-D quadratic case: eigenvalues of F D^2u F with F = sqrt(2A)
struct CurvatureProbe2D {
    std::vector<double> eig_min, eig_max;  // per node
    double w_min, w_max;                   // min of eig_min, max of eig_max
    double h_slack;
};

// slope bound P enters the slack as (2 lambda_max P + 1) 10 max(h1, h2)
CurvatureProbe2D curvature_w_2d(const GridFn2D& u, const QuadraticHamiltonian2D& Q, double P);

// snapshots of s_plus_quadratic_2d at the given flow times
std::vector<EstimateReport> check_propagation_2d(const std::vector<double>& times,
                                                 const std::vector<GridFn2D>& snapshots,
                                                 const QuadraticHamiltonian2D& Q, double C0, double P);

struct ReportSummary {
    int total = 0, passed = 0, failed = 0, skipped = 0;
    bool ok() const { return failed == 0; }
};
ReportSummary summarize(const std::vector<EstimateReport>& reports);

// t,quantity,measured,bound,slack,pass,zeta,M,m for the reports that were not skipped
void write_reports_csv(std::ostream& os, const std::vector<EstimateReport>& reports);
// pass counts, skip reasons and the failing rows
std::string reports_summary_json(const std::vector<EstimateReport>& reports);

}  // namespace hjlab
