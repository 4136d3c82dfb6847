import matplotlib
matplotlib.use('agg')
from matplotlib import rcParams
from matplotlib.cm import viridis

cmap = viridis
rcParams['font.size'] = 9
rcParams['lines.markersize'] = 5
rcParams['axes.grid'] = False

method_colors = {
    'raw': 'k',
    'histeq': 'tab:orange',
    'bgdiff': 'tab:green',
    'sbn': 'tab:purple',
}
