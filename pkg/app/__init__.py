# Seirkit
