// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "poselift/errors.hpp"
#include "poselift/metrics.hpp"

namespace poselift::cli {

int run_report(const ReportOptions& opt) {
    std::ostringstream text;
    std::ostringstream csv;
    csv << "file,protocol,mpjpe_mm,pck,auc,pckh05";
    bool csv_header_done = false;

    for (const std::string& path : opt.metrics_files) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open metrics file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        const MetricsReport report = metrics_report_from_json(ss.str());

        text << "== " << path << "\n" << metrics_report_table(report) << "\n";
        if (!csv_header_done) {
            for (const auto& [name, _] : report.symmetry) csv << ",sym_" << name;
            csv << "\n";
            csv_header_done = true;
        }
        csv << path << "," << report.protocol << "," << report.mpjpe_mm << "," << report.pck
            << "," << report.auc << "," << report.pckh05;
        for (const auto& [_, value] : report.symmetry) csv << "," << value;
        csv << "\n";
    }

    std::cout << text.str();
    if (!opt.out_txt.empty()) {
        std::ofstream out(resolve_out(opt.out_txt));
        out << text.str();
    }
    if (!opt.out_csv.empty()) {
        std::ofstream out(resolve_out(opt.out_csv));
        out << csv.str();
    }
    return 0;
}

}  // namespace poselift::cli
