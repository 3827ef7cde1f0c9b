#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvclone/mqc.hpp"
#include "cvclone/optimizer.hpp"
#include "cvclone/protocol.hpp"
#include "cvclone/version.hpp"

namespace py = pybind11;

namespace {

using namespace cvclone;

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

py::dict report_dict(const TelecloneReport& report) {
    py::dict d;
    d["M"] = report.M;
    d["method"] = report.method;
    d["fidelity_per_clone"] = report.fidelity_per_clone;
    d["optimal_fidelity"] = report.optimal_fidelity;
    d["lambda_x"] = report.lambda_x;
    d["lambda_p"] = report.lambda_p;
    d["feedforward_gain_x"] = report.feedforward_gain_x;
    d["feedforward_gain_p"] = report.feedforward_gain_p;
    d["clone_mean"] = std::vector<double>{report.clone_mean(0), report.clone_mean(1)};
    d["noise"] = to_rows(report.channel.noise);
    if (report.method == "monte_carlo") {
        d["trials"] = report.trials;
        d["seed"] = report.seed;
        d["fidelity_std_error"] = report.fidelity_std_error;
    }
    return d;
}

InputSpec make_input(double x0, double p0, double s_in) {
    InputSpec input;
    input.kind = s_in == 0.0 ? InputSpec::Kind::Coherent : InputSpec::Kind::Squeezed;
    input.x0 = x0;
    input.p0 = p0;
    input.s_in = s_in;
    return input;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "continuous-variable telecloning simulator";
    m.attr("__version__") = CVCLONE_VERSION;

    m.def("equal_squeezing_db", &equal_squeezing_db, py::arg("M"),
          "per-mode squeezing budget in dB (negative)");
    m.def("optimal_fidelity", &optimal_fidelity, py::arg("M"),
          "best symmetric 1->M coherent-state cloning fidelity M/(2M-1)");
    m.def("clone_fidelity", &clone_fidelity, py::arg("lambda_x"), py::arg("lambda_p"),
          py::arg("s_in") = 0.0, "single-clone fidelity from the channel's excess noise");
    m.def(
        "solve_squeezing",
        [](int M, double theta0) { return solve_squeezing(M, theta0); },
        py::arg("M"), py::arg("theta0"), "derived squeezing parameters (r1, r2)");
    m.def(
        "mqc_covariance",
        [](int M, double theta0, double s) {
            return to_rows(build_mqc(make_mqc_spec(M, theta0, s)).cov);
        },
        py::arg("M"), py::arg("theta0") = M_PI / 4.0, py::arg("s") = 0.0,
        "covariance matrix of the (M+1)-mode resource state");
    m.def(
        "teleclone",
        [](int M, double theta0, double s, double x0, double p0, double s_in) {
            const GaussianState state = build_mqc(make_mqc_spec(M, theta0, s));
            return report_dict(run_teleclone_analytic(state, 0, make_input(x0, p0, s_in)));
        },
        py::arg("M"), py::arg("theta0") = M_PI / 4.0, py::arg("s") = 0.0, py::arg("x0") = 0.0,
        py::arg("p0") = 0.0, py::arg("s_in") = 0.0, "exact ensemble-channel protocol run");
    m.def(
        "teleclone_mc",
        [](int M, long long trials, std::uint64_t seed, double x0, double p0) {
            const GaussianState state = build_mqc(make_mqc_spec(M, M_PI / 4.0, 0.0));
            return report_dict(run_teleclone_mc(state, 0, make_input(x0, p0, 0.0), trials, seed));
        },
        py::arg("M"), py::arg("trials") = 100000, py::arg("seed") = 0, py::arg("x0") = 0.0,
        py::arg("p0") = 0.0, "sampled protocol run with jackknife errors");
}
