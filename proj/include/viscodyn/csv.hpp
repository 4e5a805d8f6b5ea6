#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "viscodyn/energy.hpp"
#include "viscodyn/sdof.hpp"

namespace viscodyn {

// %.17g: enough digits to reproduce the double exactly on read-back.
std::string full_precision(double value);

// Header "t,r,v,a,f_1,...,f_P", one row per node.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// Header "t,E_int,D_d,W_d,Delta_d", one row per node.
void write_energy_csv(std::ostream& out, const Trajectory& trajectory,
                      const EnergyLedger& ledger);

// Header "dt,delta_ratio,D_over_W", one row per dt.
void write_report_csv(std::ostream& out, const std::vector<DissipationRow>& rows);

// Load table: '#' comments, rows "t, F" with strictly increasing t.
std::vector<std::pair<double, double>> read_load_table(std::istream& in,
                                                       const std::string& origin);

}  // namespace viscodyn
