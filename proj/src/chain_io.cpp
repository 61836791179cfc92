#include "edgelab/chain_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace edgelab {

using nlohmann::json;

std::string chain_to_json(const ChainSpec& chain, const AdditiveFunctional& f,
                          const std::string& provenance) {
    json j;
    j["version"] = 1;
    auto sz = chain.sizes();
    j["sizes"] = sz;
    json kernels = json::array();
    for (const auto& R : chain.kernels) {
        json rows = json::array();
        for (int x = 0; x < R.rows(); ++x)
            for (int y = 0; y < R.cols(); ++y) rows.push_back(R(x, y));
        kernels.push_back(rows);
    }
    j["kernels"] = kernels;
    if (chain.reference.empty()) {
        j["reference"] = nullptr;
    } else {
        json ref = json::array();
        for (const auto& m : chain.reference) {
            json row = json::array();
            for (int y = 0; y < m.size(); ++y) row.push_back(m(y));
            ref.push_back(row);
        }
        j["reference"] = ref;
    }
    json mu = json::array();
    for (int x = 0; x < chain.mu1.size(); ++x) mu.push_back(chain.mu1(x));
    j["mu1"] = mu;
    json ftab = json::array();
    for (std::size_t t = 0; t < f.tables.size(); ++t) {
        json rows = json::array();
        for (int x = 0; x < f.tables[t].rows(); ++x)
            for (int y = 0; y < f.tables[t].cols(); ++y) {
                if (f.lattice_den) {
                    json q;
                    q["num"] = f.lattice_num[t](x, y);
                    q["den"] = *f.lattice_den;
                    rows.push_back(q);
                } else {
                    rows.push_back(f.tables[t](x, y));
                }
            }
        ftab.push_back(rows);
    }
    j["f"] = ftab;
    if (f.lattice_den)
        j["lattice"] = json{{"L", *f.lattice_den}};
    else
        j["lattice"] = nullptr;
    j["eps0"] = chain.eps0;
    json labels = json::object();
    for (const auto& l : f.labels) labels[l] = true;
    j["labels"] = labels;
    if (!provenance.empty()) j["provenance"] = json::parse(provenance);
    return j.dump(2);
}

ChainFile chain_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("version", 0) != 1)
        throw std::invalid_argument("unsupported chain-spec version");
    ChainFile out;
    std::vector<int> sizes = j.at("sizes").get<std::vector<int>>();
    const int N = static_cast<int>(sizes.size()) - 1;
    if (N < 1) throw std::invalid_argument("sizes must list at least two spaces");
    auto& chain = out.chain;
    chain.kernels.resize(N);
    for (int t = 0; t < N; ++t) {
        const auto& flat = j.at("kernels").at(t);
        if (static_cast<int>(flat.size()) != sizes[t] * sizes[t + 1])
            throw std::invalid_argument("kernel entry count mismatch");
        chain.kernels[t].resize(sizes[t], sizes[t + 1]);
        for (int x = 0; x < sizes[t]; ++x)
            for (int y = 0; y < sizes[t + 1]; ++y)
                chain.kernels[t](x, y) = flat.at(x * sizes[t + 1] + y).get<double>();
    }
    if (!j.at("reference").is_null()) {
        const auto& ref = j.at("reference");
        chain.reference.resize(N);
        for (int t = 0; t < N; ++t) {
            chain.reference[t].resize(sizes[t + 1]);
            for (int y = 0; y < sizes[t + 1]; ++y)
                chain.reference[t](y) = ref.at(t).at(y).get<double>();
        }
    }
    chain.mu1.resize(sizes[0]);
    for (int x = 0; x < sizes[0]; ++x) chain.mu1(x) = j.at("mu1").at(x).get<double>();
    chain.eps0 = j.at("eps0").get<double>();

    auto& f = out.f;
    bool lattice = !j.at("lattice").is_null();
    if (lattice) f.lattice_den = j.at("lattice").at("L").get<std::int64_t>();
    f.tables.resize(N);
    if (lattice) f.lattice_num.resize(N);
    for (int t = 0; t < N; ++t) {
        const auto& flat = j.at("f").at(t);
        f.tables[t].resize(sizes[t], sizes[t + 1]);
        if (lattice) f.lattice_num[t].setZero(sizes[t], sizes[t + 1]);
        for (int x = 0; x < sizes[t]; ++x)
            for (int y = 0; y < sizes[t + 1]; ++y) {
                const auto& v = flat.at(x * sizes[t + 1] + y);
                if (lattice) {
                    std::int64_t num = v.at("num").get<std::int64_t>();
                    std::int64_t den = v.at("den").get<std::int64_t>();
                    if (den <= 0 || *f.lattice_den % den != 0)
                        throw std::invalid_argument("lattice entry denominator mismatch");
                    num *= *f.lattice_den / den;
                    f.lattice_num[t](x, y) = num;
                    f.tables[t](x, y) = double(num) / double(*f.lattice_den);
                } else {
                    f.tables[t](x, y) = v.get<double>();
                }
            }
    }
    if (j.contains("labels"))
        for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it)
            if (it.value().is_boolean() && it.value().get<bool>()) f.labels.push_back(it.key());
    if (j.contains("provenance")) out.provenance = j["provenance"].dump();
    chain.check_structure();
    f.check_against(chain);
    return out;
}

ChainFile load_chain_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return chain_from_json(ss.str());
}

void save_chain_json(const std::string& path, const ChainSpec& chain,
                     const AdditiveFunctional& f, const std::string& provenance) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot write " + path);
    outf << chain_to_json(chain, f, provenance) << "\n";
}

}  // namespace edgelab
