import minilib

minilib.io.load('settings.cfg')
