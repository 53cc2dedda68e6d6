//! Recorded simulation output and its CSV export.

use std::fmt::Write as _;

use num_complex::Complex64;

pub const WAVEFORM_CSV_HEADER: &str = "t_s,i_L_A,v_o_V,q,cmp_active,sample_flag,sample_value";

/// One ADC conversion and the controller update it triggered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub cycle: u64,
    pub t: f64,
    /// `H_i · i_L` at the sampling instant, before any series injection.
    pub sensed: f64,
    /// Value converted by the ADC (sensed signal plus analog injection).
    pub adc: f64,
    /// Value entering the error computation (ADC value plus digital injection).
    pub controller_input: f64,
    pub reference: f64,
    /// `d(H_i i_L)/dt` just at the sample, with the switch state of that interval.
    pub slope: f64,
    /// New shadow register value.
    pub cmp_out: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub t: f64,
    pub on: bool,
}

/// Exact per-cycle summary obtained by integrating the piecewise-LTI solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub index: u64,
    pub t_start: f64,
    pub x_start: [f64; 2],
    pub integ_start: f64,
    pub cmp_active_start: f64,
    pub on_time: f64,
    pub mean_i_l: f64,
    pub mean_v_o: f64,
    /// `∫ V_IN q i_L dt` over the cycle.
    pub input_energy: f64,
}

/// Exact continuous-time Fourier integrals `∫ x(t) e^{-jωt} dt` of the state
/// over the recorded window, absolute time origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSums {
    pub f_hz: f64,
    pub t_start: f64,
    pub duration: f64,
    pub integral: [Complex64; 2],
}

impl SpectralSums {
    /// Peak-convention coefficient `(2/T_w) ∫ x_i e^{-jωt} dt` of state `i`.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.integral[i] * (2.0 / self.duration)
    }
}

/// Uniformly resampled records plus the event-level logs of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Waveform {
    /// Resample period; zero when no grid was requested.
    pub dt: f64,
    pub t: Vec<f64>,
    pub i_l: Vec<f64>,
    pub v_o: Vec<f64>,
    pub q: Vec<u8>,
    pub cmp_active: Vec<f64>,
    /// ADC-side signal `H_i i_L + v_p(t)` on the grid.
    pub adc_side: Vec<f64>,
    /// Index into `samples` of the conversion falling in each grid interval.
    pub sample_at_row: Vec<Option<usize>>,
    pub samples: Vec<SampleRecord>,
    pub edges: Vec<EdgeRecord>,
    pub cycles: Vec<CycleRecord>,
    pub spectrum: Option<SpectralSums>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.t.len() + 1));
        out.push_str(WAVEFORM_CSV_HEADER);
        out.push('\n');
        for r in 0..self.t.len() {
            let (flag, value) = match self.sample_at_row[r] {
                Some(k) => (1, self.samples[k].adc),
                None => (0, 0.0),
            };
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{},{:.12e},{},{:.12e}",
                self.t[r], self.i_l[r], self.v_o[r], self.q[r], self.cmp_active[r], flag, value
            );
        }
        out
    }
}
