// Python bindings: partitions, Moebius function, transform verification and the suite.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bifree/mobius.hpp"
#include "bifree/partitions.hpp"
#include "bifree/suite.hpp"
#include "bifree/transforms.hpp"

namespace py = pybind11;
using namespace bifree;

namespace {

std::vector<std::vector<int>> blocks_of(const BncPartition& p) { return p.blocks(); }

BncPartition make(const std::string& shape, const Blocks& blocks) {
    return BncPartition(ChiShape::from_string(shape), blocks);
}

}  // namespace

PYBIND11_MODULE(_bifree, m) {
    m.doc() = "bi-free probability with amalgamation";

    m.def("catalan", &catalan, py::arg("n"));
    m.def(
        "enumerate_bnc",
        [](const std::string& shape) {
            std::vector<Blocks> out;
            for (const auto& p : enumerate_bnc(ChiShape::from_string(shape))) out.push_back(blocks_of(p));
            return out;
        },
        py::arg("shape"), "BNC(shape) as lists of 0-based blocks");
    m.def(
        "enumerate_bnc_prime",
        [](const std::string& side, int n) {
            std::vector<Blocks> out;
            for (const auto& p : enumerate_bnc_prime(side == "r" ? Side::R : Side::L, n)) out.push_back(blocks_of(p));
            return out;
        },
        py::arg("side"), py::arg("n"));
    m.def(
        "mobius",
        [](const std::string& shape, const Blocks& pi, const Blocks& sigma) {
            return mobius(make(shape, pi), make(shape, sigma));
        },
        py::arg("shape"), py::arg("pi"), py::arg("sigma"));
    m.def(
        "join", [](const std::string& shape, const Blocks& a, const Blocks& b) { return blocks_of(join(make(shape, a), make(shape, b))); },
        py::arg("shape"), py::arg("pi"), py::arg("sigma"));
    m.def(
        "meet", [](const std::string& shape, const Blocks& a, const Blocks& b) { return blocks_of(meet(make(shape, a), make(shape, b))); },
        py::arg("shape"), py::arg("pi"), py::arg("sigma"));

    m.def(
        "verify",
        [](const std::string& theorem, int order, double rho, int points, std::uint64_t seed) {
            Truncation t;
            t.order = order;
            t.rho = rho;
            PairSetup s = PairSetup::from_families(build_families(ExperimentConfig{}.model));
            py::gil_scoped_release release;
            return verify(parse_theorem(theorem), s, t, points, seed).to_json().dump();
        },
        py::arg("theorem"), py::arg("order") = 5, py::arg("rho") = 0.05, py::arg("points") = 2, py::arg("seed") = 11,
        "JSON report of one transform identity group on the default model");

    m.def("suite_check_names", &suite_check_names);
    m.def("explain", &explain, py::arg("name"));
    m.def(
        "run_suite",
        [](const std::string& config_json) {
            ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
            py::gil_scoped_release release;
            return run_suite(c).dump();
        },
        py::arg("config_json") = "{}", "JSON suite report for a JSON config");

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TransformError>(m, "TransformError", PyExc_ArithmeticError);
}
