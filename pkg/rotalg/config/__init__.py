# 空文件，使目录成为Python包
