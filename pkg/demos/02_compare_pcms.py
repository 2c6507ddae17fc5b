"""Rank the seven built-in commercial PCMs at 100 kW/m^2.

Reproduces the material screening study: every PCM fills the reference
100x50 um channel and is scored on the four metrics. Solder 174 wins on
all of them because its 77 degC melt point sits just below the
temperature band the chip actually reaches, so the melt front swings
fully back and forth each cycle. Low-melting-point alloys (the two
Cerrolows) are liquid the whole time at quasi-steady state and buffer
nothing. Results land in out/compare_pcms/.
"""

from pcmopt.studies import run_pcm_comparison

if __name__ == "__main__":
    rows = run_pcm_comparison(power=100e3, out_dir="out/compare_pcms")
    print(f"{'material':>12} {'T_m':>6} {'T_o_max':>8} {'T_osc':>7} "
          f"{'dt_85':>7} {'dPhi':>6}")
    for r in rows:
        tm = "-" if r["T_m_C"] is None else f"{r['T_m_C']:.1f}"
        dt85 = r["dt_85"] if r["dt_85"] == "never" else f"{r['dt_85']:.2f}"
        print(f"{r['material']:>12} {tm:>6} {r['T_o_max']:8.2f} "
              f"{r['T_osc']:7.2f} {dt85:>7} {r['dPhi_melt']:6.3f}")
