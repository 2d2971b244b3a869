#include "yannrl/envs/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::envs {

void Trajectory::push(double time, const Vector& state, const Vector& input, double stage_cost) {
    t.push_back(time);
    x.push_back(state);
    u.push_back(input);
    cost.push_back(stage_cost);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open trajectory file for writing: " + path);
    }
    const auto n = traj.x.empty() ? 0 : traj.x.front().size();
    const auto m = traj.u.empty() ? 0 : traj.u.front().size();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) {
        out << ",x" << i + 1;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        out << ",u" << j + 1;
    }
    out << ",cost\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_double(traj.t[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            out << ',' << format_double(traj.x[k][i]);
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            out << ',' << format_double(traj.u[k][j]);
        }
        out << ',' << format_double(traj.cost[k]) << '\n';
    }
    if (!out) {
        throw Error("failed writing trajectory file: " + path);
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open trajectory file: " + path);
    }
    std::string line;
    std::getline(in, line);
    int n = 0;
    int m = 0;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) {
            if (!cell.empty() && cell[0] == 'x') {
                ++n;
            } else if (!cell.empty() && cell[0] == 'u') {
                ++m;
            }
        }
    }
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) {
            values.push_back(std::stod(cell));
        }
        if (static_cast<int>(values.size()) != 2 + n + m) {
            throw Error("malformed trajectory row in " + path);
        }
        Vector x = Eigen::Map<Vector>(values.data() + 1, n);
        Vector u = Eigen::Map<Vector>(values.data() + 1 + n, m);
        traj.push(values.front(), x, u, values.back());
    }
    return traj;
}

}  // namespace yannrl::envs
