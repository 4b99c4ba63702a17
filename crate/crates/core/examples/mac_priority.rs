//! Priority encoding in the transmit offset and three-sender contention.

use rtwn::mac::contention::{run_contention, ContentionConfig};
use rtwn::mac::{adjusted_tx_offset, priority_levels, SlotTiming};

fn main() -> rtwn::Result<()> {
    for tick in [400, 200, 100, 60, 30] {
        let timing = SlotTiming::with_tick(tick)?;
        let levels = priority_levels(&timing);
        let offsets: Vec<u32> = (0..levels.min(4)).map(|p| adjusted_tx_offset(&timing, p).unwrap()).collect();
        let cfg = ContentionConfig { timing, ..ContentionConfig::default() };
        let stats = run_contention(&cfg)?;
        print!("tick {tick:>3}us levels {levels:>2} offsets {offsets:?}");
        for s in &stats {
            print!(" | p{} drop {:.3} lat {:.0}ms", s.priority, s.drop_rate(), s.mean_latency_ms());
        }
        println!();
    }
    Ok(())
}
