use srx_core::buffer::{SampleBuffer, Samples, SamplesPerSymbol};
use srx_core::imdd::*;
use srx_core::modulation::{map_symbols, ModulationFormat};
use srx_core::prbs::{prbs_bits, PrbsState};
use srx_core::rrc::{rrc_filter_taps, RrcSpec};

fn main() {
    let fmt = ModulationFormat::Pam(4);
    let (bits, _) = prbs_bits(PrbsState::prbs15(1).unwrap(), 2 * (1 << 21));
    let symbols = match map_symbols(&bits, fmt).unwrap() {
        Samples::Real(v) => v,
        _ => unreachable!(),
    };
    let taps = rrc_filter_taps(&RrcSpec::new(0.5, 1.0), 2.0, 65).unwrap();
    let n = srx_core::buffer::BUFFER_LEN;
    let mut stream = vec![0.0f32; n];
    for (m, &a) in symbols.iter().enumerate() {
        let center = 2 * m as i64;
        if center >= n as i64 + 64 { break; }
        for (t, &h) in taps.iter().enumerate() {
            let idx = center + t as i64 - 32;
            if idx >= 0 && (idx as usize) < n {
                stream[idx as usize] += (a as f64 * h) as f32;
            }
        }
    }
    let buffer = SampleBuffer::real(stream, 4e9, SamplesPerSymbol::new(2, 1), 0);
    let matched_taps = rrc_filter_taps(&RrcSpec::new(0.5, 2e9), 4e9, 65).unwrap();
    let rx = ImddReceiver::new(ImddConfig {
        format: fmt,
        equalizer: StaticEqualizer::from_real_taps(&matched_taps).unwrap(),
        thresholds: None,
        keep_halfsym: false,
    });
    let (frame, _) = rx.process_buffer(&buffer, ImddCarry::new()).unwrap();
    println!("emitted 255/256/257: {} {} {}", frame.emitted_255, frame.emitted_256, frame.emitted_257);
    println!("dc {} amp {}", frame.dc_offset, frame.amplitude);
    println!("phase trace first 6: {:?}", &frame.clock_phase_trace[..6]);
    println!("first 40 rx bits:  {:?}", &frame.bits[256..296]);
    println!("tx bits from 0:    {:?}", &bits[0..40]);
    // check agreement at various shifts around 256
    for off in [252usize, 254, 256, 258, 260] {
        let m: usize = frame.bits[2048..6144].iter().zip(bits[off+2048-256..].iter()).filter(|(a,b)| a==b).count();
        println!("offset {off}: {}/4096", m);
    }
}
