//! Gnuplot scripts for the CSV outputs. Data files start with a `#`
//! header line and a column-name row; `skip 2` drops both.

use crate::config::ScenarioKind;

pub fn gnuplot_script(kind: ScenarioKind, data: &str) -> String {
    let body = match kind {
        ScenarioKind::Packet | ScenarioKind::Breathing => format!(
            "set xlabel \"x\"\nset ylabel \"t\"\nset zlabel \"rho\"\nset hidden3d\n\
             splot \"{data}\" skip 2 using 2:1:3 with lines title \"TDSE\", \\\n      \
             \"{data}\" skip 2 using 2:1:4 with lines title \"closed form\"\n"
        ),
        ScenarioKind::Rabi => format!(
            "set xlabel \"t\"\nset ylabel \"population\"\n\
             plot \"{data}\" skip 2 using 1:2 with lines title \"upper level\", \\\n     \
             \"{data}\" skip 2 using 1:4 with lines title \"Rabi formula\"\n"
        ),
        ScenarioKind::Scan => format!(
            "set xlabel \"omega\"\nset ylabel \"transfer probability\"\nset logscale y\n\
             plot \"{data}\" skip 2 using 1:2 with linespoints title \"scan\"\n"
        ),
        ScenarioKind::Compton => format!(
            "set xlabel \"theta (deg)\"\nset ylabel \"delta lambda (m)\"\nset y2label \"electron energy (keV)\"\nset y2tics\n\
             plot \"{data}\" skip 2 using 1:3 with lines title \"wavelength shift\", \\\n     \
             \"{data}\" skip 2 using 1:4 axes x1y2 with lines title \"electron energy\"\n"
        ),
        ScenarioKind::Photo => format!(
            "set xlabel \"photon energy (eV)\"\nset ylabel \"v (cm/s)\"\n\
             plot \"{data}\" skip 2 using 1:3 with lines title \"photoelectron speed\"\n"
        ),
        ScenarioKind::Timescales => format!(
            "set logscale y\nset ylabel \"time (s)\"\nset xtics (\"tau_q\" 0, \"tau_ed\" 1, \"tau_r\" 2)\n\
             plot \"{data}\" skip 2 using (0):2 with points pt 7 notitle, \"\" skip 2 using (1):3 with points pt 7 notitle, \
             \"\" skip 2 using (2):4 with points pt 7 notitle\n"
        ),
    };
    format!("set datafile separator \",\"\nset datafile commentschars \"#\"\n{body}")
}
