/// Hard/soft threshold gate: transmit when the reading reaches the hard
/// threshold and, after the first transmission, has moved by at least the
/// soft threshold since the last transmitted value.
pub fn teen_should_transmit(sensed: f64, last_transmitted: Option<f64>, ht: f64, st: f64) -> bool {
    sensed >= ht && last_transmitted.is_none_or(|last| (sensed - last).abs() >= st)
}
