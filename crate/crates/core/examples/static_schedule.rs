//! Retry allocation and an EDF static schedule on a small grid.

use rtwn::model::{packet_pdr, Mode, NetworkModel, TaskSpec};
use rtwn::static_scheduler::{allocate_retry_vector, build_static_schedule, verify_schedulable};

fn main() -> rtwn::Result<()> {
    let net = NetworkModel::random_grid(4, 4, 0.85, 0.99, 3)?;
    let c = net.controller();
    let route = |a: usize, b: usize| {
        let mut p = net.shortest_path(a, c).unwrap();
        p.extend(net.shortest_path(c, b).unwrap().into_iter().skip(1));
        p
    };
    let tasks = vec![
        TaskSpec::new(0, route(0, 15), 40, 40),
        TaskSpec::new(1, route(3, 12), 80, 80),
        TaskSpec::new(2, route(5, 10), 80, 60),
    ];

    for t in &tasks {
        let pdrs = net.path_pdrs(&t.path)?;
        let r = allocate_retry_vector(&pdrs, 0.99)?;
        let names: Vec<&str> = t.path.iter().map(|&n| net.name(n)).collect();
        println!("task {} {:?} retries {:?} pdr {:.4}", t.id, names, r, packet_pdr(&pdrs, &r)?);
    }

    for mode in [Mode::Tbs, Mode::Pbs] {
        let st = build_static_schedule(&tasks, &net, mode, 0.99)?;
        let busy = (0..st.horizon()).filter(|&t| !st.schedule.is_idle(t)).count();
        let verdict = verify_schedulable(&st, &tasks, &net, 0.99);
        println!("{mode:?}: feasible={} hyperperiod={} busy {busy}/{} verified={}", st.feasible, st.hyperperiod, st.horizon(), verdict.passed());
    }
    Ok(())
}
