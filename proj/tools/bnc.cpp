// Bi-non-crossing partition utilities.
#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <regex>

#include "bifree/mobius.hpp"
#include "bifree/partitions.hpp"

using namespace bifree;

namespace {

// "{1,3},{2},{4}" with 1-based positions.
Blocks parse_blocks(const std::string& s) {
    Blocks out;
    std::regex block(R"(\{([^}]*)\})");
    for (auto it = std::sregex_iterator(s.begin(), s.end(), block); it != std::sregex_iterator(); ++it) {
        std::vector<int> b;
        std::string body = (*it)[1];
        std::regex num(R"(\d+)");
        for (auto jt = std::sregex_iterator(body.begin(), body.end(), num); jt != std::sregex_iterator(); ++jt)
            b.push_back(std::stoi(jt->str()) - 1);
        if (b.empty()) throw std::invalid_argument("empty block in " + s);
        out.push_back(b);
    }
    if (out.empty()) throw std::invalid_argument("no blocks in '" + s + "'");
    return out;
}

std::string blocks_str(const Blocks& bs) {
    std::string s;
    for (const auto& b : bs) {
        if (!s.empty()) s += ",";
        s += "{";
        for (size_t k = 0; k < b.size(); ++k) s += (k ? "," : "") + std::to_string(b[k] + 1);
        s += "}";
    }
    return s;
}

void print_list(const std::vector<BncPartition>& ps, bool as_json) {
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& p : ps) j.push_back(p.str());
        std::cout << j.dump() << "\n";
        return;
    }
    for (const auto& p : ps) std::cout << p.str() << "\n";
    std::cout << "# " << ps.size() << " partitions\n";
}

Side parse_side(const std::string& s) {
    if (s == "l" || s == "left") return Side::L;
    if (s == "r" || s == "right") return Side::R;
    throw std::invalid_argument("side must be l or r");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bi-non-crossing partitions: enumeration, lattice operations, Moebius function"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    std::string shape, pi, sigma;
    int n = 1, m = 1;
    std::string side = "l", cls = "all";

    auto* count = app.add_subcommand("count", "number of partitions of a shape (Catalan check)");
    count->add_option("shape", shape, "shape word, e.g. lrrl")->required();
    auto* enumerate = app.add_subcommand("enumerate", "list BNC(shape)");
    enumerate->add_option("shape", shape)->required();
    auto* mob = app.add_subcommand("mobius", "mu(pi, sigma)");
    mob->add_option("shape", shape)->required();
    mob->add_option("pi", pi, "blocks, 1-based: {1,3},{2}")->required();
    mob->add_option("sigma", sigma)->required();
    auto* jn = app.add_subcommand("join", "pi v sigma");
    jn->add_option("shape", shape)->required();
    jn->add_option("pi", pi)->required();
    jn->add_option("sigma", sigma)->required();
    auto* mt = app.add_subcommand("meet", "pi ^ sigma");
    mt->add_option("shape", shape)->required();
    mt->add_option("pi", pi)->required();
    mt->add_option("sigma", sigma)->required();
    auto* kr = app.add_subcommand("kreweras", "Kreweras complement of a non-crossing partition of n points");
    kr->add_option("n", n)->required();
    kr->add_option("pi", pi)->required();
    auto* prime = app.add_subcommand("prime", "pinched family BNC'(n) on 2n points of one side");
    prime->add_option("--side", side, "l or r");
    prime->add_option("-n", n)->required();
    auto* fam = app.add_subcommand("family", "T or S split families");
    std::string which;
    fam->add_option("kind", which, "T or S")->required()->check(CLI::IsMember({"T", "S"}));
    fam->add_option("-n", n)->required();
    fam->add_option("-m", m)->required();
    fam->add_option("--class", cls, "all|e|o|o'|o0|or|ol|olr");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*count) {
            auto sh = ChiShape::from_string(shape);
            auto k = enumerate_bnc(sh).size();
            if (as_json) std::cout << nlohmann::json{{"shape", shape}, {"count", k}, {"catalan", catalan(sh.size())}}.dump() << "\n";
            else std::cout << k << " (Catalan(" << sh.size() << ") = " << catalan(sh.size()) << ")\n";
        } else if (*enumerate) {
            print_list(enumerate_bnc(ChiShape::from_string(shape)), as_json);
        } else if (*mob) {
            auto sh = ChiShape::from_string(shape);
            auto v = mobius(BncPartition(sh, parse_blocks(pi)), BncPartition(sh, parse_blocks(sigma)));
            std::cout << v << "\n";
        } else if (*jn || *mt) {
            auto sh = ChiShape::from_string(shape);
            BncPartition a(sh, parse_blocks(pi)), b(sh, parse_blocks(sigma));
            std::cout << (*jn ? join(a, b) : meet(a, b)).str() << "\n";
        } else if (*kr) {
            std::cout << blocks_str(kreweras(n, parse_blocks(pi))) << "\n";
        } else if (*prime) {
            print_list(enumerate_bnc_prime(parse_side(side), n), as_json);
        } else if (*fam) {
            if (which == "T") print_list(enumerate_bnc_T(n, m, parse_tclass(cls)), as_json);
            else print_list(enumerate_bnc_S(n, m, parse_sclass(cls)), as_json);
        }
    } catch (const std::exception& e) {
        std::cerr << "bnc: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
